#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bbo/detectors.hpp"
#include "bbo/image.hpp"

namespace bbo {

struct AttackConfig {
  std::string algo = "algo1";
  std::size_t budget = 10000;
  double linf = 0.03;
  double threshold = 0.5;
  bool early_stop = true;
  /// Blur width for SM/GSM algorithms; defaults to image width / 8.
  std::optional<double> kernel_sigma;
};

/// Throws std::invalid_argument for L <= 0, B == 0, a threshold outside
/// (0, 1] or an unknown algorithm id.
void validate(const AttackConfig& config);

struct AttackResult {
  bool success = false;
  bool errored = false;
  std::string error;
  std::size_t queries_used = 0;
  double initial_score = 0.0;
  double final_score = 0.0;
  /// Perturbation actually applied, already clamped to [-L, L].
  std::vector<double> perturbation;
  /// clamp(x + perturbation, 0, 1)
  Image attacked;
};

/// Minimizes e -> D(clamp(x + e, 0, 1)) over [-L, L]^t starting from e = 0.
/// Detector failures end the attack with `errored` set.
AttackResult attack_one(const Image& image, Detector& detector, const AttackConfig& config, std::uint64_t seed);

/// Seed used for the attack on image `index` of a dataset run.
std::uint64_t attack_seed(std::uint64_t seed, std::size_t index);

struct ImageOutcome {
  std::string image_id;
  /// Score of the clean image; NaN when it could not be scored.
  double clean_score = 0.0;
  /// Set when the image was attacked (clean score at or above threshold).
  std::optional<AttackResult> result;
  /// Why the image was not attacked, when it was not.
  std::string skip_reason;
  bool clean_errored = false;
};

struct AttackSummary {
  std::vector<ImageOutcome> outcomes;
  std::size_t attacked = 0;
  std::size_t skipped = 0;
  std::size_t successes = 0;
  std::size_t errored = 0;
  /// successes / (attacked - errored); empty when nothing was attacked.
  std::optional<double> success_rate;
};

/// Scores every image, attacks those flagged as fake. Each worker thread owns
/// one detector made by `factory`; outcomes do not depend on `parallelism`.
AttackSummary attack_dataset(const std::vector<Image>& images, const std::vector<std::string>& ids,
                             const DetectorFactory& factory, const AttackConfig& config, std::uint64_t seed,
                             std::size_t parallelism = 1);

/// Rows: image_id,algo,budget,linf,seed,success,queries_used,initial_score,final_score.
/// `success` is true/false for attacked images, "skip" or "error" otherwise.
void write_attack_csv(std::ostream& out, const AttackSummary& summary, const AttackConfig& config,
                      std::uint64_t seed);

}  // namespace bbo
