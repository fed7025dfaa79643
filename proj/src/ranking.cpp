#include "bbo/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace bbo {

MeanLossTable mean_losses(const std::vector<RunRecord>& records) {
  std::map<std::string, std::map<CellKey, std::pair<double, std::size_t>>> sums;
  for (const auto& r : records) {
    if (r.error || std::isnan(r.final_loss)) continue;
    auto& [total, count] = sums[r.algo][{r.problem, r.budget}];
    total += r.final_loss;
    ++count;
  }
  MeanLossTable table;
  for (const auto& [algo, cells] : sums)
    for (const auto& [key, acc] : cells) table[algo][key] = acc.first / static_cast<double>(acc.second);
  return table;
}

ScoreTable compute_scores(const MeanLossTable& table) {
  if (table.empty()) throw std::invalid_argument("no records to score");
  ScoreTable out;
  for (const auto& [algo, cells] : table) out.algos.push_back(algo);
  const std::size_t n = out.algos.size();
  out.pairwise.assign(n, std::vector<double>(n, 0.0));

  for (std::size_t a = 0; a < n; ++a) {
    const auto& mine = table.at(out.algos[a]);
    for (std::size_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const auto& theirs = table.at(out.algos[b]);
      std::size_t common = 0, wins = 0;
      for (const auto& [key, loss] : mine) {
        const auto it = theirs.find(key);
        if (it == theirs.end()) continue;
        ++common;
        if (loss < it->second) ++wins;
      }
      if (common == 0)
        throw std::invalid_argument("algorithms '" + out.algos[a] + "' and '" + out.algos[b] +
                                    "' share no (problem, budget) cell");
      out.pairwise[a][b] = static_cast<double>(wins) / static_cast<double>(common);
    }
  }

  out.score.resize(n);
  for (std::size_t a = 0; a < n; ++a)
    out.score[a] = std::accumulate(out.pairwise[a].begin(), out.pairwise[a].end(), 0.0) / static_cast<double>(n);

  // algos are already sorted by id, so a stable sort breaks ties by id.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return out.score[x] > out.score[y]; });
  out.rank.resize(n);
  for (std::size_t position = 0; position < n; ++position) out.rank[order[position]] = position;
  return out;
}

ScoreTable compute_scores(const std::vector<RunRecord>& records) { return compute_scores(mean_losses(records)); }

std::vector<StabilityEntry> stability_report(const MeanLossTable& table, const std::string& algo_a,
                                             const std::string& algo_b) {
  std::vector<StabilityEntry> entries;
  const auto ia = table.find(algo_a);
  const auto ib = table.find(algo_b);
  if (ia == table.end() || ib == table.end()) return entries;

  // problem -> ascending budgets present for both algorithms
  std::map<std::string, std::vector<std::pair<std::size_t, std::pair<double, double>>>> shared;
  for (const auto& [key, loss_a] : ia->second) {
    const auto it = ib->second.find(key);
    if (it != ib->second.end()) shared[key.first].push_back({key.second, {loss_a, it->second}});
  }
  for (const auto& [problem, rows] : shared) {
    StabilityEntry e;
    e.problem = problem;
    e.budgets_compared = rows.size();
    for (auto it = rows.rbegin(); it != rows.rend() && it->second.first < it->second.second; ++it) ++e.k;
    e.bound = std::ldexp(1.0, -static_cast<int>(e.k));
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<StabilityEntry> stability_report(const std::vector<RunRecord>& records, const std::string& algo_a,
                                             const std::string& algo_b) {
  return stability_report(mean_losses(records), algo_a, algo_b);
}

}  // namespace bbo
