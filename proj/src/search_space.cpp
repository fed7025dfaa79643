#include "bbo/search_space.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace bbo {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void validate(const CoordinateDomain& domain) {
  std::visit(overloaded{
                 [](const BooleanDomain&) {},
                 [](const IntegerDomain& d) {
                   if (!(d.lo < d.hi)) throw std::invalid_argument("integer domain needs lo < hi");
                 },
                 [](const RealDomain& d) {
                   if (!std::isfinite(d.lo) || !std::isfinite(d.hi) || !(d.lo < d.hi))
                     throw std::invalid_argument("real domain needs finite lo < hi");
                 },
                 [](const CategoricalDomain& d) {
                   if (d.k < 2) throw std::invalid_argument("categorical domain needs k >= 2");
                 },
             },
             domain);
}

bool contains(const CoordinateDomain& domain, double value) {
  return std::visit(overloaded{
                        [&](const BooleanDomain&) { return value == 0.0 || value == 1.0; },
                        [&](const IntegerDomain& d) {
                          return value == std::floor(value) && value >= static_cast<double>(d.lo) &&
                                 value <= static_cast<double>(d.hi);
                        },
                        [&](const RealDomain& d) { return value >= d.lo && value <= d.hi; },
                        [&](const CategoricalDomain& d) {
                          return value == std::floor(value) && value >= 0.0 &&
                                 value < static_cast<double>(d.k);
                        },
                    },
                    domain);
}

double sample(const CoordinateDomain& domain, Rng& rng) {
  return std::visit(overloaded{
                        [&](const BooleanDomain&) { return static_cast<double>(rng.below(2)); },
                        [&](const IntegerDomain& d) { return static_cast<double>(rng.integer(d.lo, d.hi)); },
                        [&](const RealDomain& d) {
                          double v = rng.uniform(d.lo, d.hi);
                          while (v <= d.lo) v = rng.uniform(d.lo, d.hi);
                          return v;
                        },
                        [&](const CategoricalDomain& d) { return static_cast<double>(rng.below(d.k)); },
                    },
                    domain);
}

std::string describe(const CoordinateDomain& domain) {
  return std::visit(overloaded{
                        [](const BooleanDomain&) { return std::string("bool"); },
                        [](const IntegerDomain& d) {
                          return "int[" + std::to_string(d.lo) + "," + std::to_string(d.hi) + "]";
                        },
                        [](const RealDomain& d) {
                          return "real(" + std::to_string(d.lo) + "," + std::to_string(d.hi) + ")";
                        },
                        [](const CategoricalDomain& d) { return "cat(" + std::to_string(d.k) + ")"; },
                    },
                    domain);
}

SearchSpace::SearchSpace(std::vector<CoordinateDomain> coords, std::vector<std::size_t> shape)
    : coords_(std::move(coords)), shape_(std::move(shape)) {
  if (coords_.empty()) throw std::invalid_argument("search space needs at least one coordinate");
  for (const auto& d : coords_) validate(d);
  if (!shape_.empty()) {
    std::size_t product = 1;
    for (std::size_t extent : shape_) {
      if (extent == 0) throw std::invalid_argument("shape extents must be positive");
      product *= extent;
    }
    if (product != coords_.size())
      throw std::invalid_argument("shape product " + std::to_string(product) +
                                  " does not match dimension " + std::to_string(coords_.size()));
  }
}

SearchSpace SearchSpace::booleans(std::size_t n) {
  return SearchSpace(std::vector<CoordinateDomain>(n, BooleanDomain{}));
}

SearchSpace SearchSpace::reals(std::size_t n, double lo, double hi, std::vector<std::size_t> shape) {
  return SearchSpace(std::vector<CoordinateDomain>(n, RealDomain{lo, hi}), std::move(shape));
}

bool SearchSpace::all_real() const {
  for (const auto& d : coords_)
    if (!std::holds_alternative<RealDomain>(d)) return false;
  return true;
}

bool SearchSpace::contains(std::span<const double> values) const {
  if (values.size() != coords_.size()) return false;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!bbo::contains(coords_[i], values[i])) return false;
  return true;
}

Candidate sample_uniform(const SearchSpace& space, Rng& rng) {
  Candidate c;
  c.values.reserve(space.size());
  for (const auto& d : space.coords()) {
    if (const auto* real = std::get_if<RealDomain>(&d)) {
      double v = rng.uniform(real->lo, real->hi);
      while (v <= real->lo) v = rng.uniform(real->lo, real->hi);
      c.values.push_back(v);
    } else {
      c.values.push_back(sample(d, rng));
    }
  }
  return c;
}

double resample_distinct(const CoordinateDomain& domain, double current, Rng& rng) {
  // Discrete domains draw directly among the other values, which has the
  // same law as redrawing until distinct.
  return std::visit(
      overloaded{
          [&](const BooleanDomain&) { return current == 0.0 ? 1.0 : 0.0; },
          [&](const IntegerDomain& d) {
            const auto cur = static_cast<std::int64_t>(current);
            std::int64_t v = rng.integer(d.lo, d.hi - 1);
            if (v >= cur) ++v;
            return static_cast<double>(v);
          },
          [&](const RealDomain&) {
            for (std::size_t attempt = 0; attempt < kMaxDistinctRetries; ++attempt) {
              const double v = sample(domain, rng);
              if (v != current) return v;
            }
            throw std::runtime_error("could not draw a distinct real value in " + describe(domain));
          },
          [&](const CategoricalDomain& d) {
            const auto cur = static_cast<std::uint64_t>(current);
            std::uint64_t v = rng.below(d.k - 1);
            if (v >= cur) ++v;
            return static_cast<double>(v);
          },
      },
      domain);
}

Candidate mutate(const SearchSpace& space, const Candidate& x, std::size_t ell, Rng& rng) {
  const std::size_t n = space.size();
  if (ell < 1 || ell > n)
    throw std::invalid_argument("mutation strength " + std::to_string(ell) + " outside [1, " +
                                std::to_string(n) + "]");
  if (x.values.size() != n) throw std::invalid_argument("candidate does not match the search space");

  Candidate y{x.values, std::nullopt};
  // Partial Fisher-Yates: the first ell slots end up holding distinct positions.
  std::vector<std::uint32_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0u);
  for (std::size_t j = 0; j < ell; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(positions[j], positions[pick]);
    const std::uint32_t i = positions[j];
    y.values[i] = resample_distinct(space[i], x.values[i], rng);
  }
  return y;
}

std::size_t sample_binomial(std::size_t n, double p, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial rate outside [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (n <= 64) {
    // Inversion on the smaller tail keeps (1-p)^n away from underflow.
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    const double odds = q / (1.0 - q);
    const double u = rng.uniform01();
    double pmf = std::pow(1.0 - q, static_cast<double>(n));
    double cdf = pmf;
    std::size_t k = 0;
    while (u >= cdf && k < n) {
      pmf *= odds * static_cast<double>(n - k) / static_cast<double>(k + 1);
      ++k;
      cdf += pmf;
    }
    return flip ? n - k : k;
  }
  // Geometric skipping: gaps between successes are Geometric(q), so the
  // cost is O(n q) instead of O(n).
  const bool flip = p > 0.5;
  const double q = flip ? 1.0 - p : p;
  const double log_miss = std::log1p(-q);
  std::size_t count = 0;
  double pos = -1.0;
  for (;;) {
    pos += 1.0 + std::floor(std::log(1.0 - rng.uniform01()) / log_miss);
    if (pos >= static_cast<double>(n)) break;
    ++count;
  }
  return flip ? n - count : count;
}

std::size_t sample_binomial_positive(std::size_t n, double p, Rng& rng) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("binomial rate must lie in (0, 1)");
  if (n == 0) throw std::invalid_argument("binomial needs n >= 1");
  for (std::size_t attempt = 0; attempt < kMaxZeroRejections; ++attempt) {
    const std::size_t ell = sample_binomial(n, p, rng);
    if (ell > 0) return ell;
  }
  throw std::runtime_error("zero-truncated binomial: too many zero draws (n=" + std::to_string(n) +
                           ", p=" + std::to_string(p) + ")");
}

}  // namespace bbo
