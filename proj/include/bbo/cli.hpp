#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bbo::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kPartial = 2 };

/// Everything a subcommand needs. Fields irrelevant to the subcommand keep
/// their defaults and are left out of the canonical form.
struct RunConfig {
  std::string command;  // "bench", "rank" or "attack"
  std::string out_dir = ".";
  std::size_t parallelism = 1;
  std::uint64_t seed = 0;

  // bench
  std::string suite;
  std::vector<std::string> algos;
  std::vector<std::size_t> budgets;
  std::size_t seeds = 1;
  bool traces = false;

  // rank
  std::string results;

  // attack
  std::string detector;
  std::string images;
  std::string algo = "algo1";
  std::size_t budget = 10000;
  double linf = 0.03;
  bool early_stop = true;
  bool save_images = false;
  std::optional<double> kernel_sigma;

  /// One-line JSON with sorted keys. Parallelism is omitted since outputs do
  /// not depend on it.
  std::string canonical() const;
  static RunConfig from_canonical(const std::string& text);

  bool operator==(const RunConfig&) const = default;
};

std::string version();

/// Comment header written at the top of every output file.
std::string output_header(const RunConfig& config);

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_rank(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_attack(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (honouring BBO_SEED) and dispatches.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bbo::cli
