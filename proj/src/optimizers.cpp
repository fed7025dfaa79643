#include "bbo/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

namespace bbo {

namespace {

// NaN compares as +infinity so it never wins a selection.
double ordered(double loss) { return std::isnan(loss) ? std::numeric_limits<double>::infinity() : loss; }

bool no_worse(const Candidate& a, const Candidate& b) { return ordered(*a.loss) <= ordered(*b.loss); }

}  // namespace

double lognormal_update_rate(double p, double q, double gamma) {
  return 1.0 / (1.0 + (1.0 - p) / p * std::exp(gamma * q));
}

std::optional<std::size_t> first_best_index(std::span<const double> losses) {
  if (losses.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < losses.size(); ++i)
    if (ordered(losses[i]) < ordered(losses[best])) best = i;
  return best;
}

std::size_t lengler_strength(std::size_t n, std::size_t t) { return std::max<std::size_t>(1, n / (t + 2)); }

double rate_floor(std::size_t n) { return 0.01 / static_cast<double>(std::max<std::size_t>(n, 1)); }

void Optimizer::start(Evaluator& ev, Rng& rng, const std::optional<std::vector<double>>& initial) {
  if (initial) {
    if (!ev.space().contains(*initial)) throw std::invalid_argument("initial point lies outside the search space");
    parent_ = Candidate{*initial, std::nullopt};
  } else {
    parent_ = sample_uniform(ev.space(), rng);
  }
  ev.evaluate(parent_);
}

// --- log-normal (1+lambda) EA ---

LogNormalEA::LogNormalEA(const SearchSpace& space, LogNormalConfig config)
    : config_(config), p_(config.initial_p), floor_(rate_floor(space.size())) {
  if (!(config_.initial_p > 0.0 && config_.initial_p < 1.0))
    throw std::invalid_argument("log-normal initial rate must lie in (0, 1)");
  if (config_.lambda < 1) throw std::invalid_argument("log-normal population size must be >= 1");
  p_ = std::clamp(p_, floor_, 1.0 - floor_);
}

void LogNormalEA::step(Evaluator& ev, Rng& rng) {
  const SearchSpace& space = ev.space();
  ++iterations_;
  // Only the first best offspring of the generation is kept.
  std::optional<Candidate> best;
  double best_rate = p_;
  for (std::size_t i = 0; i < config_.lambda && !ev.exhausted(); ++i) {
    const double q = rng.normal();
    const double rate = std::clamp(lognormal_update_rate(p_, q, config_.gamma), floor_, 1.0 - floor_);
    const std::size_t ell = sample_binomial_positive(space.size(), rate, rng);
    Candidate child = mutate(space, parent_, ell, rng);
    ev.evaluate(child);
    if (!best || ordered(*child.loss) < ordered(*best->loss)) {
      best = std::move(child);
      best_rate = rate;
    }
  }
  if (!best) return;
  p_ = best_rate;
  if (no_worse(*best, parent_)) parent_ = std::move(*best);
}

// --- random search ---

void RandomSearch::step(Evaluator& ev, Rng& rng) {
  if (ev.exhausted()) return;
  ++iterations_;
  Candidate c = sample_uniform(ev.space(), rng);
  ev.evaluate(c);
  if (no_worse(c, parent_)) parent_ = std::move(c);
}

// --- self-adjusting (1+1) EA ---

AdaptiveEA::AdaptiveEA(const SearchSpace& space, AdaptiveConfig config)
    : factor_(config.factor), exponent_(config.exponent) {
  const double n = static_cast<double>(space.size());
  if (!(factor_ > 1.0)) throw std::invalid_argument("adaptive factor F must exceed 1");
  p_min_ = config.p_min.value_or(1.0 / (4.0 * n));
  p_max_ = config.p_max.value_or(0.5);
  if (!(p_min_ > 0.0 && p_min_ <= p_max_ && p_max_ < 1.0))
    throw std::invalid_argument("adaptive clamps need 0 < p_min <= p_max < 1");
  p_ = std::clamp(config.initial_p.value_or(1.0 / n), p_min_, p_max_);
}

void AdaptiveEA::step(Evaluator& ev, Rng& rng) {
  if (ev.exhausted()) return;
  ++iterations_;
  const SearchSpace& space = ev.space();
  Candidate child = mutate(space, parent_, sample_binomial_positive(space.size(), p_, rng), rng);
  ev.evaluate(child);
  if (no_worse(child, parent_)) {
    p_ = std::min(p_max_, std::pow(factor_, exponent_) * p_);
    parent_ = std::move(child);
  } else {
    p_ = std::max(p_min_, p_ / factor_);
  }
}

// --- Lengler schedule ---

void LenglerEA::step(Evaluator& ev, Rng& rng) {
  if (ev.exhausted()) return;
  const SearchSpace& space = ev.space();
  const std::size_t ell = lengler_strength(space.size(), iterations_);
  ++iterations_;
  Candidate child = mutate(space, parent_, ell, rng);
  ev.evaluate(child);
  if (no_worse(child, parent_)) parent_ = std::move(child);
}

// --- anisotropic self-adaptation ---

AnisotropicEA::AnisotropicEA(const SearchSpace& space, AnisotropicConfig config)
    : config_(config), floor_(rate_floor(space.size())) {
  if (!(config_.initial_p > 0.0 && config_.initial_p < 1.0))
    throw std::invalid_argument("anisotropic initial rate must lie in (0, 1)");
  if (config_.lambda < 1) throw std::invalid_argument("anisotropic population size must be >= 1");
  rates_.assign(space.size(), std::clamp(config_.initial_p, floor_, 1.0 - floor_));
}

Candidate AnisotropicEA::make_offspring(const SearchSpace& space, const Candidate& parent,
                                        std::span<const double> rates, std::vector<double>& child_rates,
                                        double gamma, double floor, Rng& rng) {
  const std::size_t n = space.size();
  child_rates.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    child_rates[i] = std::clamp(lognormal_update_rate(rates[i], rng.normal(), gamma), floor, 1.0 - floor);

  std::vector<char> chosen(n);
  for (std::size_t attempt = 0; attempt < kMaxZeroRejections; ++attempt) {
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      chosen[i] = rng.bernoulli(child_rates[i]) ? 1 : 0;
      any = any || chosen[i];
    }
    if (!any) continue;
    Candidate child{parent.values, std::nullopt};
    for (std::size_t i = 0; i < n; ++i)
      if (chosen[i]) child.values[i] = resample_distinct(space[i], parent.values[i], rng);
    return child;
  }
  throw std::runtime_error("anisotropic mutation: no coordinate selected after repeated draws");
}

void AnisotropicEA::step(Evaluator& ev, Rng& rng) {
  const SearchSpace& space = ev.space();
  ++iterations_;
  std::optional<Candidate> best;
  std::vector<double> best_rates;
  std::vector<double> child_rates;
  for (std::size_t i = 0; i < config_.lambda && !ev.exhausted(); ++i) {
    Candidate child = make_offspring(space, parent_, rates_, child_rates, config_.gamma, floor_, rng);
    ev.evaluate(child);
    if (!best || ordered(*child.loss) < ordered(*best->loss)) {
      best = std::move(child);
      best_rates = child_rates;
    }
  }
  if (!best) return;
  rates_ = std::move(best_rates);
  if (no_worse(*best, parent_)) parent_ = std::move(*best);
}

// --- (1+1) ES with one-fifth rule ---

OneFifthES::OneFifthES(const SearchSpace& space) {
  if (!space.all_real()) throw std::invalid_argument("one-fifth ES requires an all-real search space");
  double total = 0.0;
  for (const auto& d : space.coords()) {
    const auto& r = std::get<RealDomain>(d);
    total += (r.hi - r.lo) / 6.0;
  }
  sigma_ = total / static_cast<double>(space.size());
}

void OneFifthES::step(Evaluator& ev, Rng& rng) {
  if (ev.exhausted()) return;
  ++iterations_;
  const SearchSpace& space = ev.space();
  Candidate child{parent_.values, std::nullopt};
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto& r = std::get<RealDomain>(space[i]);
    child.values[i] = std::clamp(parent_.values[i] + sigma_ * rng.normal(), r.lo, r.hi);
  }
  ev.evaluate(child);
  if (no_worse(child, parent_)) {
    sigma_ *= std::exp(kSuccessLog);
    parent_ = std::move(child);
  } else {
    sigma_ *= std::exp(kFailureLog);
  }
}

}  // namespace bbo
