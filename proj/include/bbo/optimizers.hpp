#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bbo/evaluator.hpp"
#include "bbo/rng.hpp"
#include "bbo/search_space.hpp"

namespace bbo {

inline constexpr double kDefaultLearningRate = 0.22;

/// Parameters of the (1+lambda) EA with log-normal rate adaptation.
struct LogNormalConfig {
  double initial_p = 0.2;
  std::size_t lambda = 12;
  double gamma = kDefaultLearningRate;

  static LogNormalConfig standard() { return {0.2, 12}; }
  static LogNormalConfig big() { return {0.2, 120}; }
  static LogNormalConfig huge() { return {0.2, 1200}; }
  static LogNormalConfig small() { return {0.2, 4}; }
  static LogNormalConfig x() { return {0.8, 12}; }
  static LogNormalConfig xsmall() { return {0.8, 4}; }
};

/// p' = 1 / (1 + (1-p)/p * exp(gamma * q)). Decreasing in q, p' = p at q = 0,
/// so the median of p' over q ~ N(0,1) is p.
double lognormal_update_rate(double p, double q, double gamma = kDefaultLearningRate);

/// Index of the first minimum; NaN losses rank last. Empty input gives nullopt.
std::optional<std::size_t> first_best_index(std::span<const double> losses);

/// Strength schedule of the Lengler (1+1) EA: max(1, floor(n / (t + 2))).
std::size_t lengler_strength(std::size_t n, std::size_t t);

/// Mutation rates are kept in [floor, 1 - floor] with floor = 0.01 / n. Below
/// that, Bin>0(n, p) is 1 with probability above 0.995, so the clamp only
/// keeps rejection sampling of zero strengths cheap.
double rate_floor(std::size_t n);

/// Iterative minimizer driven one generation at a time through an Evaluator.
class Optimizer {
public:
  virtual ~Optimizer() = default;

  /// Evaluates the starting point: `initial` when given, else a uniform sample.
  virtual void start(Evaluator& ev, Rng& rng, const std::optional<std::vector<double>>& initial = std::nullopt);

  /// One iteration. Consumes at least one evaluation unless the evaluator is
  /// exhausted; stops early (keeping what was evaluated) when it runs out.
  virtual void step(Evaluator& ev, Rng& rng) = 0;

  virtual const Candidate& parent() const { return parent_; }
  virtual void replace_parent(Candidate c) { parent_ = std::move(c); }

  std::size_t iterations() const { return iterations_; }

protected:
  Candidate parent_;
  std::size_t iterations_ = 0;
};

class LogNormalEA final : public Optimizer {
public:
  LogNormalEA(const SearchSpace& space, LogNormalConfig config);

  void step(Evaluator& ev, Rng& rng) override;

  double rate() const { return p_; }
  const LogNormalConfig& config() const { return config_; }

private:
  LogNormalConfig config_;
  double p_;
  double floor_;
};

class RandomSearch final : public Optimizer {
public:
  void step(Evaluator& ev, Rng& rng) override;
};

/// Self-adjusting (1+1) EA: p <- min(p_max, F^s p) when the offspring is at
/// least as good as the parent, else p <- max(p_min, p / F).
struct AdaptiveConfig {
  double factor = 2.0;
  double exponent = 1.0;
  std::optional<double> initial_p;  // defaults to 1/n
  std::optional<double> p_min;      // defaults to 1/(4n)
  std::optional<double> p_max;      // defaults to 1/2
};

class AdaptiveEA final : public Optimizer {
public:
  AdaptiveEA(const SearchSpace& space, AdaptiveConfig config = {});

  void step(Evaluator& ev, Rng& rng) override;

  double rate() const { return p_; }
  double p_min() const { return p_min_; }
  double p_max() const { return p_max_; }

private:
  double factor_;
  double exponent_;
  double p_min_;
  double p_max_;
  double p_;
};

class LenglerEA final : public Optimizer {
public:
  void step(Evaluator& ev, Rng& rng) override;
};

/// (1+lambda) EA with one log-normally adapted mutation rate per coordinate.
struct AnisotropicConfig {
  double initial_p = 0.2;
  std::size_t lambda = 1;
  double gamma = kDefaultLearningRate;
};

class AnisotropicEA final : public Optimizer {
public:
  AnisotropicEA(const SearchSpace& space, AnisotropicConfig config = {});

  void step(Evaluator& ev, Rng& rng) override;

  std::span<const double> rates() const { return rates_; }

  /// Offspring generation, exposed for tests: every rate is updated with its
  /// own normal draw, then coordinate i is redrawn with probability rate i.
  /// An offspring with no redrawn coordinate is regenerated.
  static Candidate make_offspring(const SearchSpace& space, const Candidate& parent,
                                  std::span<const double> rates, std::vector<double>& child_rates,
                                  double gamma, double floor, Rng& rng);

private:
  AnisotropicConfig config_;
  std::vector<double> rates_;
  double floor_;
};

/// (1+1) evolution strategy with the multiplicative one-fifth success rule,
/// for all-real spaces. Offspring are clamped to the box.
class OneFifthES final : public Optimizer {
public:
  explicit OneFifthES(const SearchSpace& space);

  void step(Evaluator& ev, Rng& rng) override;

  double sigma() const { return sigma_; }

  static constexpr double kSuccessLog = 1.0 / 3.0;
  static constexpr double kFailureLog = -1.0 / 12.0;

private:
  double sigma_;
};

}  // namespace bbo
