#include "bbo/evaluator.hpp"

#include <cmath>

namespace bbo {

Evaluator::Evaluator(const Objective& objective, std::size_t budget, EvaluatorOptions options)
    : objective_(objective), budget_(budget), options_(options) {
  if (options_.record_trace) trace_.reserve(budget_);
}

double Evaluator::evaluate(Candidate& c) {
  if (exhausted()) throw BudgetExhausted();
  const double loss = objective_.loss(c.values);
  c.loss = loss;
  ++evaluations_;
  // NaN never counts as an improvement over a number.
  const bool improves = !best_ || (!std::isnan(loss) && (std::isnan(*best_->loss) || loss < *best_->loss));
  if (improves) best_ = c;
  if (options_.record_trace)
    trace_.push_back(best_->loss.value_or(loss));
  if (options_.stop_below && loss < *options_.stop_below) stopped_ = true;
  return loss;
}

}  // namespace bbo
