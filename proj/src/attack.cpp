#include "bbo/attack.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "bbo/algorithms.hpp"
#include "bbo/harness.hpp"
#include "bbo/rng.hpp"

namespace bbo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> clamp_box(std::span<const double> e, double linf) {
  std::vector<double> out(e.begin(), e.end());
  for (double& v : out) v = std::clamp(v, -linf, linf);
  return out;
}

Image apply_perturbation(const Image& image, std::span<const double> e) {
  Image out{image.width, image.height, image.channels, std::vector<double>(image.size())};
  for (std::size_t i = 0; i < out.pixels.size(); ++i) out.pixels[i] = std::clamp(image.pixels[i] + e[i], 0.0, 1.0);
  return out;
}

}  // namespace

void validate(const AttackConfig& config) {
  if (!(config.linf > 0.0) || !std::isfinite(config.linf)) throw std::invalid_argument("linf must be positive");
  if (config.budget < 1) throw std::invalid_argument("budget must be at least 1");
  if (!(config.threshold > 0.0 && config.threshold <= 1.0))
    throw std::invalid_argument("threshold must lie in (0, 1]");
  if (config.kernel_sigma && !(*config.kernel_sigma > 0.0))
    throw std::invalid_argument("kernel sigma must be positive");
  parse_algorithm(config.algo);
}

AttackResult attack_one(const Image& image, Detector& detector, const AttackConfig& config, std::uint64_t seed) {
  validate(config);
  validate(image);
  const AlgorithmSpec spec = parse_algorithm(config.algo);
  const std::vector<std::size_t> shape{image.height, image.width, image.channels};
  const LossWrapperConfig wrapper{config.linf, config.kernel_sigma};

  AttackResult result;
  result.initial_score = kNaN;
  result.final_score = kNaN;
  const std::size_t queries_before = detector.query_count();

  // The raw objective sees the point after any G/SM/GSM transform; the point
  // behind the best score is kept so the reported perturbation is exactly
  // the one that was queried.
  Image query{image.width, image.height, image.channels, std::vector<double>(image.size())};
  std::vector<double> best_point;
  Objective objective{SearchSpace::reals(image.size(), -config.linf, config.linf, shape),
                      [&](std::span<const double> e) {
                        for (std::size_t i = 0; i < e.size(); ++i)
                          query.pixels[i] =
                              std::clamp(image.pixels[i] + std::clamp(e[i], -config.linf, config.linf), 0.0, 1.0);
                        const double s = detector.score(query);
                        if (std::isnan(result.initial_score)) result.initial_score = s;
                        if (std::isnan(result.final_score) || s < result.final_score) {
                          result.final_score = s;
                          best_point.assign(e.begin(), e.end());
                        }
                        return s;
                      }};

  RunOptions options;
  options.initial = std::vector<double>(image.size(), 0.0);
  options.evaluator.record_trace = false;
  if (config.early_stop) options.evaluator.stop_below = config.threshold;
  options.loss_wrapper = wrapper;

  try {
    const RunRecord record = run(spec.id, objective, config.budget, seed, options);
    result.final_score = record.final_loss;
    result.perturbation = clamp_box(best_point, config.linf);
    result.attacked = apply_perturbation(image, result.perturbation);
  } catch (const std::exception& e) {
    result.errored = true;
    result.error = e.what();
  }
  result.queries_used = detector.query_count() - queries_before;
  result.success = !result.errored && result.final_score < config.threshold;
  return result;
}

std::uint64_t attack_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, "attack", index); }

AttackSummary attack_dataset(const std::vector<Image>& images, const std::vector<std::string>& ids,
                             const DetectorFactory& factory, const AttackConfig& config, std::uint64_t seed,
                             std::size_t parallelism) {
  validate(config);
  if (ids.size() != images.size()) throw std::invalid_argument("one id per image required");

  AttackSummary summary;
  summary.outcomes.resize(images.size());

  auto process = [&](Detector& detector, std::size_t i) {
    ImageOutcome& out = summary.outcomes[i];
    out.image_id = ids[i];
    try {
      validate(images[i]);
      out.clean_score = detector.score(images[i]);
    } catch (const std::exception& e) {
      out.clean_score = kNaN;
      out.clean_errored = true;
      out.skip_reason = e.what();
      return;
    }
    if (out.clean_score < config.threshold) {
      out.skip_reason = "not detected as fake";
      return;
    }
    out.result = attack_one(images[i], detector, config, attack_seed(seed, i));
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, images.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::unique_ptr<Detector> detector;
    for (std::size_t i = next++; i < images.size(); i = next++) {
      if (!detector) detector = factory();
      process(*detector, i);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  for (const auto& o : summary.outcomes) {
    if (!o.result) {
      ++summary.skipped;
      continue;
    }
    ++summary.attacked;
    if (o.result->errored) ++summary.errored;
    if (o.result->success) ++summary.successes;
  }
  if (summary.attacked > summary.errored)
    summary.success_rate =
        static_cast<double>(summary.successes) / static_cast<double>(summary.attacked - summary.errored);
  return summary;
}

void write_attack_csv(std::ostream& out, const AttackSummary& summary, const AttackConfig& config,
                      std::uint64_t seed) {
  out << "image_id,algo,budget,linf,seed,success,queries_used,initial_score,final_score\n";
  const std::string algo = parse_algorithm(config.algo).id;
  for (const auto& o : summary.outcomes) {
    out << o.image_id << ',' << algo << ',' << config.budget << ',' << format_double(config.linf) << ',' << seed
        << ',';
    if (!o.result) {
      out << (o.clean_errored ? "error" : "skip") << ",0," << format_double(o.clean_score) << ",nan\n";
      continue;
    }
    const AttackResult& r = *o.result;
    out << (r.errored ? "error" : r.success ? "true" : "false") << ',' << r.queries_used << ','
        << format_double(r.initial_score) << ',' << format_double(r.final_score) << '\n';
  }
}

}  // namespace bbo
