#include "bbo/algorithms.hpp"

#include <algorithm>
#include <sstream>

namespace bbo {

const std::vector<std::string>& base_algorithm_ids() {
  static const std::vector<std::string> ids = {
      "lognormal", "big-lognormal", "huge-lognormal", "small-lognormal", "x-lognormal", "xsmall-lognormal",
      "rs",        "adaptive",      "lengler",        "anisotropic",     "one-fifth-es"};
  return ids;
}

const std::vector<std::pair<std::string, std::string>>& algorithm_aliases() {
  static const std::vector<std::pair<std::string, std::string>> aliases = {
      {"algo1", "gsm-supersmooth-lognormal"}, {"algo2", "g-supersmooth-lognormal"},
      {"algo3", "supersmooth-lognormal"},     {"algo4", "lognormal"},
      {"algo5", "gsm-big-lognormal"},         {"algo6", "g-big-lognormal"},
  };
  return aliases;
}

std::string valid_algorithm_help() {
  std::ostringstream out;
  out << "valid algorithms:";
  for (const auto& id : base_algorithm_ids()) out << ' ' << id;
  out << "\nprefixes: g- sm- gsm- (loss) then smooth- supersmooth- ultrasmooth- zetasmooth-";
  out << "\naliases:";
  for (const auto& [alias, target] : algorithm_aliases()) out << ' ' << alias << '=' << target;
  return out.str();
}

namespace {

bool consume(std::string_view& s, std::string_view prefix) {
  if (s.substr(0, prefix.size()) != prefix) return false;
  s.remove_prefix(prefix.size());
  return true;
}

}  // namespace

AlgorithmSpec parse_algorithm(std::string_view id) {
  for (const auto& [alias, target] : algorithm_aliases())
    if (id == alias) return parse_algorithm(target);

  AlgorithmSpec spec;
  std::string_view rest = id;
  if (consume(rest, "gsm-")) spec.loss_modifier = LossModifier::GSM;
  else if (consume(rest, "sm-")) spec.loss_modifier = LossModifier::SM;
  else if (consume(rest, "g-")) spec.loss_modifier = LossModifier::G;

  if (consume(rest, "smooth-")) spec.smooth = SmoothLevel::Default;
  else if (consume(rest, "supersmooth-")) spec.smooth = SmoothLevel::Super;
  else if (consume(rest, "ultrasmooth-")) spec.smooth = SmoothLevel::Ultra;
  else if (consume(rest, "zetasmooth-")) spec.smooth = SmoothLevel::Zeta;

  if (rest == "oln")
    throw UnknownId("'oln' (optimistic log-normal) needs a noisy-optimization wrapper that is not provided\n" +
                    valid_algorithm_help());
  const auto& ids = base_algorithm_ids();
  if (std::find(ids.begin(), ids.end(), rest) == ids.end())
    throw UnknownId("unknown algorithm '" + std::string(id) + "'\n" + valid_algorithm_help());
  spec.base = std::string(rest);
  spec.id = std::string(id);
  return spec;
}

std::unique_ptr<Optimizer> make_optimizer(const AlgorithmSpec& spec, const SearchSpace& space, std::uint64_t seed) {
  std::unique_ptr<Optimizer> opt;
  const std::string& b = spec.base;
  if (b == "lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::standard());
  else if (b == "big-lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::big());
  else if (b == "huge-lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::huge());
  else if (b == "small-lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::small());
  else if (b == "x-lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::x());
  else if (b == "xsmall-lognormal") opt = std::make_unique<LogNormalEA>(space, LogNormalConfig::xsmall());
  else if (b == "rs") opt = std::make_unique<RandomSearch>();
  else if (b == "adaptive") opt = std::make_unique<AdaptiveEA>(space);
  else if (b == "lengler") opt = std::make_unique<LenglerEA>();
  else if (b == "anisotropic") opt = std::make_unique<AnisotropicEA>(space);
  else if (b == "one-fifth-es") opt = std::make_unique<OneFifthES>(space);
  else throw UnknownId("unknown algorithm '" + b + "'\n" + valid_algorithm_help());

  if (spec.smooth)
    opt = std::make_unique<SmoothModifier>(space, std::move(opt), SmoothConfig{*spec.smooth},
                                           derive_seed(seed, "smooth"));
  return opt;
}

RunRecord run(std::string_view algo_id, const Objective& objective, std::size_t budget, std::uint64_t seed,
              const RunOptions& options) {
  if (budget < 1) throw std::invalid_argument("budget must be at least 1");
  const AlgorithmSpec spec = parse_algorithm(algo_id);
  const Objective wrapped = apply_loss_modifier(objective, spec.loss_modifier, options.loss_wrapper);

  Rng rng(seed);
  std::unique_ptr<Optimizer> opt = make_optimizer(spec, wrapped.space, seed);
  Evaluator ev(wrapped, budget, options.evaluator);
  opt->start(ev, rng, options.initial);
  while (!ev.exhausted()) {
    const std::size_t before = ev.evaluations();
    opt->step(ev, rng);
    if (ev.evaluations() == before) throw std::logic_error("optimizer step consumed no evaluation");
  }

  RunRecord record;
  record.algo = spec.id;
  record.budget = budget;
  record.seed = seed;
  record.best = *ev.best();
  record.final_loss = *record.best.loss;
  record.trace = ev.trace();
  record.evaluations = ev.evaluations();
  return record;
}

}  // namespace bbo
