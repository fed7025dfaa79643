#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bbo/rng.hpp"

namespace bbo {

struct BooleanDomain {};

/// Closed integer range [lo, hi], lo < hi.
struct IntegerDomain {
  std::int64_t lo;
  std::int64_t hi;
};

/// Real interval with lo < hi. Samples are drawn from the open interval.
struct RealDomain {
  double lo;
  double hi;
};

/// Unordered categories encoded as 0..k-1, k >= 2.
struct CategoricalDomain {
  std::size_t k;
};

using CoordinateDomain = std::variant<BooleanDomain, IntegerDomain, RealDomain, CategoricalDomain>;

/// Throws std::invalid_argument when a domain breaks its invariant.
void validate(const CoordinateDomain& domain);
bool contains(const CoordinateDomain& domain, double value);
double sample(const CoordinateDomain& domain, Rng& rng);
std::string describe(const CoordinateDomain& domain);

/// Product of per-coordinate domains. Every value is stored as a double:
/// booleans as 0/1, integers exactly, categories as their index.
///
/// A shape annotation (e.g. {height, width, channels}) marks tensor-valued
/// spaces stored flat in row-major order. Only tensor-aware operators read it.
class SearchSpace {
public:
  explicit SearchSpace(std::vector<CoordinateDomain> coords, std::vector<std::size_t> shape = {});

  static SearchSpace booleans(std::size_t n);
  static SearchSpace reals(std::size_t n, double lo, double hi, std::vector<std::size_t> shape = {});

  std::size_t size() const { return coords_.size(); }
  const CoordinateDomain& operator[](std::size_t i) const { return coords_[i]; }
  std::span<const CoordinateDomain> coords() const { return coords_; }

  bool has_shape() const { return !shape_.empty(); }
  std::span<const std::size_t> shape() const { return shape_; }

  bool all_real() const;
  bool contains(std::span<const double> values) const;

private:
  std::vector<CoordinateDomain> coords_;
  std::vector<std::size_t> shape_;
};

/// A point of a SearchSpace plus its loss once evaluated.
struct Candidate {
  std::vector<double> values;
  std::optional<double> loss;
};

/// Every coordinate drawn independently and uniformly from its domain.
Candidate sample_uniform(const SearchSpace& space, Rng& rng);

/// Generalized mutation: picks `ell` distinct positions uniformly at random
/// and redraws each from its domain until it differs from the current value.
/// The returned candidate has no loss.
Candidate mutate(const SearchSpace& space, const Candidate& x, std::size_t ell, Rng& rng);

/// Draws a new value for one coordinate, distinct from `current`.
double resample_distinct(const CoordinateDomain& domain, double current, Rng& rng);

/// Bin(n, p). Exact inversion for n <= 64, geometric gap skipping above.
std::size_t sample_binomial(std::size_t n, double p, Rng& rng);

/// Bin(n, p) conditioned on a positive outcome, by rejection of zeros.
/// Throws if p is outside (0, 1), n == 0, or 10^6 consecutive zeros occur.
std::size_t sample_binomial_positive(std::size_t n, double p, Rng& rng);

inline constexpr std::size_t kMaxDistinctRetries = 100;
inline constexpr std::size_t kMaxZeroRejections = 1'000'000;

}  // namespace bbo
