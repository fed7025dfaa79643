#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bbo/algorithms.hpp"
#include "bbo/benchmarks.hpp"

namespace bbo {

// ---------------------------------------------------------------------------
// Grid execution
// ---------------------------------------------------------------------------

struct GridConfig {
  std::vector<std::string> algos;
  std::vector<std::size_t> budgets = default_budget_grid();
  std::size_t seeds = 1;
  std::size_t parallelism = 1;
  std::uint64_t global_seed = 0;
  bool record_traces = false;
  LossWrapperConfig loss_wrapper;
};

/// Seed of one grid cell: a stable hash of (global seed, algo, problem,
/// budget, seed index). Runs at different budgets are independent.
std::uint64_t cell_seed(std::uint64_t global_seed, std::string_view algo, std::string_view problem,
                        std::size_t budget, std::size_t seed_index);

/// One independent run per (algo, problem, budget, seed index), returned in
/// that nesting order whatever the parallelism. A failing run is recorded
/// with `error` set and a NaN final loss. Unknown algorithm ids throw before
/// anything runs.
std::vector<RunRecord> run_grid(const GridConfig& config, const std::vector<ProblemInstance>& problems);

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

/// Mean final loss per algorithm, per (problem, budget) cell.
using CellKey = std::pair<std::string, std::size_t>;
using MeanLossTable = std::map<std::string, std::map<CellKey, double>>;

/// Averages final losses over seeds; runs with errors or NaN losses are skipped.
MeanLossTable mean_losses(const std::vector<RunRecord>& records);

struct ScoreTable {
  std::vector<std::string> algos;              // sorted by id
  std::vector<std::vector<double>> pairwise;   // pairwise[a][b]: share of common cells with loss_a < loss_b
  std::vector<double> score;                   // row means, self-comparison included
  std::vector<std::size_t> rank;               // 0 = best; descending score, ties by id
};

/// Throws std::invalid_argument when the table is empty or two algorithms
/// share no cell.
ScoreTable compute_scores(const MeanLossTable& table);
ScoreTable compute_scores(const std::vector<RunRecord>& records);

struct StabilityEntry {
  std::string problem;
  std::size_t budgets_compared = 0;
  /// Number of largest consecutive budgets on which A's mean loss is below B's.
  std::size_t k = 0;
  /// 1 / 2^k.
  double bound = 1.0;
};

std::vector<StabilityEntry> stability_report(const MeanLossTable& table, const std::string& algo_a,
                                             const std::string& algo_b);
std::vector<StabilityEntry> stability_report(const std::vector<RunRecord>& records, const std::string& algo_a,
                                             const std::string& algo_b);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

class CsvError : public std::runtime_error {
public:
  CsvError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

/// Shortest decimal text that parses back to the same double ("nan" for NaN).
std::string format_double(double v);

/// Writes each line of `header` prefixed with "# ".
void write_comment_header(std::ostream& out, const std::string& header, std::string_view prefix = "# ");

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records);
/// Reads algo,problem,budget,seed,final_loss rows; '#' lines are comments.
/// Throws CsvError with the offending line number.
std::vector<RunRecord> read_results_csv(std::istream& in);

void write_scores_csv(std::ostream& out, const ScoreTable& scores);
void write_stability_csv(std::ostream& out, const std::string& algo_a, const std::string& algo_b,
                         const std::vector<StabilityEntry>& entries, bool with_header = true);

/// Trace sidecar: u64 little-endian count, then that many little-endian f64.
void write_trace(std::ostream& out, const std::vector<double>& trace);
std::vector<double> read_trace(std::istream& in);

/// "name (mean@max) [mean over the other budgets]"; the bracket is omitted
/// with a single budget.
std::string series_label(const std::string& name, const std::vector<double>& means_by_budget);

/// Line chart of mean loss against budget (log-scaled x), one series per algo.
std::string render_svg_chart(const std::string& title, const std::string& header,
                             const std::vector<std::size_t>& budgets,
                             const std::vector<std::pair<std::string, std::vector<double>>>& series);

/// Per (problem, budget), mean losses min-max normalized across algorithms,
/// then averaged over problems. Returns budgets and one curve per algo.
std::pair<std::vector<std::size_t>, std::vector<std::pair<std::string, std::vector<double>>>>
normalized_curves(const MeanLossTable& table);

struct ReportFiles {
  std::filesystem::path results_csv;
  std::filesystem::path scores_csv;
  std::vector<std::filesystem::path> charts;
  std::vector<std::filesystem::path> traces;
};

/// results.csv, scores.csv, charts/<problem>.svg, charts/normalized.svg and,
/// for records holding a trace, traces/<n>.bin. All files start with the
/// comment header.
ReportFiles emit_report(const std::vector<RunRecord>& records, const ScoreTable& scores,
                        const std::filesystem::path& out_dir, const std::string& header);

}  // namespace bbo
