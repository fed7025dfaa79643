#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "bbo/search_space.hpp"

namespace bbo {

using LossFn = std::function<double(std::span<const double>)>;

/// Deterministic black-box loss over a search space (minimized).
struct Objective {
  SearchSpace space;
  LossFn loss;
};

class BudgetExhausted : public std::logic_error {
public:
  BudgetExhausted() : std::logic_error("evaluation budget exhausted") {}
};

struct EvaluatorOptions {
  bool record_trace = true;
  /// When set, the run stops after the first evaluation with loss below it.
  std::optional<double> stop_below;
};

/// Budgeted access to an objective. Counts evaluations, keeps the best
/// candidate seen and the best-so-far loss after each evaluation.
class Evaluator {
public:
  Evaluator(const Objective& objective, std::size_t budget, EvaluatorOptions options = {});

  const SearchSpace& space() const { return objective_.space; }
  std::size_t budget() const { return budget_; }
  std::size_t evaluations() const { return evaluations_; }
  std::size_t remaining() const { return exhausted() ? 0 : budget_ - evaluations_; }
  bool stopped() const { return stopped_; }
  bool exhausted() const { return stopped_ || evaluations_ >= budget_; }

  /// Evaluates `c`, stores its loss and returns it. Throws BudgetExhausted
  /// when no evaluation is left.
  double evaluate(Candidate& c);

  const std::vector<double>& trace() const { return trace_; }
  const std::optional<Candidate>& best() const { return best_; }

private:
  const Objective& objective_;
  std::size_t budget_;
  EvaluatorOptions options_;
  std::size_t evaluations_ = 0;
  bool stopped_ = false;
  std::vector<double> trace_;
  std::optional<Candidate> best_;
};

}  // namespace bbo
