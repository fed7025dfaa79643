#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bbo/evaluator.hpp"
#include "bbo/modifiers.hpp"
#include "bbo/optimizers.hpp"

namespace bbo {

class UnknownId : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A registry id split into its parts, e.g. "gsm-supersmooth-lognormal" =
/// {loss modifier GSM, smooth level Super, base "lognormal"}.
struct AlgorithmSpec {
  std::string id;  // canonical form, aliases resolved
  std::string base;
  LossModifier loss_modifier = LossModifier::None;
  std::optional<SmoothLevel> smooth;
};

/// Base optimizer ids in registry order.
const std::vector<std::string>& base_algorithm_ids();

/// algo1..algo6 shorthands for the attack variants.
const std::vector<std::pair<std::string, std::string>>& algorithm_aliases();

/// Parses prefixes ("g-", "sm-", "gsm-", then "smooth-", "supersmooth-",
/// "ultrasmooth-", "zetasmooth-") and the base id. Throws UnknownId listing
/// the valid ids.
AlgorithmSpec parse_algorithm(std::string_view id);

std::string valid_algorithm_help();

std::unique_ptr<Optimizer> make_optimizer(const AlgorithmSpec& spec, const SearchSpace& space, std::uint64_t seed);

/// One fixed-budget run.
struct RunRecord {
  std::string algo;
  std::string problem;
  std::size_t budget = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::vector<double> trace;  // best-so-far loss after each evaluation
  Candidate best;
  std::size_t evaluations = 0;
  std::optional<std::string> error;
};

struct RunOptions {
  std::optional<std::vector<double>> initial;
  EvaluatorOptions evaluator;
  LossWrapperConfig loss_wrapper;
};

/// Runs `algo_id` on `objective` until `budget` evaluations are consumed (or
/// the evaluator's stop condition fires). Loss modifiers named in the id wrap
/// the objective. Throws UnknownId for unknown ids; objective errors propagate.
RunRecord run(std::string_view algo_id, const Objective& objective, std::size_t budget, std::uint64_t seed,
              const RunOptions& options = {});

}  // namespace bbo
