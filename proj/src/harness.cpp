#include "bbo/harness.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace bbo {

std::uint64_t cell_seed(std::uint64_t global_seed, std::string_view algo, std::string_view problem,
                        std::size_t budget, std::size_t seed_index) {
  std::uint64_t h = fnv1a(algo, mix64(global_seed));
  h = fnv1a("|", h);
  h = fnv1a(problem, h);
  return mix64(h ^ mix64(static_cast<std::uint64_t>(budget) * 0x9e3779b97f4a7c15ULL + seed_index));
}

std::vector<RunRecord> run_grid(const GridConfig& config, const std::vector<ProblemInstance>& problems) {
  if (config.algos.empty() || problems.empty() || config.budgets.empty() || config.seeds == 0)
    throw std::invalid_argument("grid needs at least one algorithm, problem, budget and seed");
  for (const auto& algo : config.algos) parse_algorithm(algo);
  for (std::size_t b : config.budgets)
    if (b < 1) throw std::invalid_argument("budgets must be positive");

  struct Cell {
    std::size_t algo, problem, budget, seed;
  };
  std::vector<Cell> cells;
  cells.reserve(config.algos.size() * problems.size() * config.budgets.size() * config.seeds);
  for (std::size_t a = 0; a < config.algos.size(); ++a)
    for (std::size_t p = 0; p < problems.size(); ++p)
      for (std::size_t b = 0; b < config.budgets.size(); ++b)
        for (std::size_t s = 0; s < config.seeds; ++s) cells.push_back({a, p, b, s});

  std::vector<RunRecord> records(cells.size());
  auto run_cell = [&](std::size_t i) {
    const Cell& cell = cells[i];
    const std::string& algo = config.algos[cell.algo];
    const ProblemInstance& problem = problems[cell.problem];
    const std::size_t budget = config.budgets[cell.budget];
    RunOptions options;
    options.evaluator.record_trace = config.record_traces;
    options.loss_wrapper = config.loss_wrapper;
    RunRecord record;
    try {
      record = run(algo, problem.objective, budget,
                   cell_seed(config.global_seed, algo, problem.id, budget, cell.seed), options);
    } catch (const std::exception& e) {
      record = RunRecord{};
      record.algo = algo;
      record.budget = budget;
      record.final_loss = std::numeric_limits<double>::quiet_NaN();
      record.error = e.what();
    }
    record.problem = problem.id;
    record.seed = cell.seed;
    record.best.values.clear();
    records[i] = std::move(record);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.parallelism, cells.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
    });
  pool.clear();
  return records;
}

}  // namespace bbo
