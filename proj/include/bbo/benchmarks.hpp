#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bbo/evaluator.hpp"

namespace bbo {

/// A benchmark problem. Every loss is >= 0 with minimum 0 at `optimum`.
struct ProblemInstance {
  std::string id;
  Objective objective;
  std::vector<double> translation;  // empty for discrete problems
  std::uint64_t instance_seed = 0;
  std::vector<double> optimum;
};

// Pseudo-Boolean problems in minimization form.
ProblemInstance onemax(std::size_t n);
ProblemInstance leadingones(std::size_t n);
/// Disagreeing neighbor pairs on the cycle x_0 - x_1 - ... - x_{n-1} - x_0.
ProblemInstance ising_ring(std::size_t n);

inline constexpr double kBoxLo = -5.0;
inline constexpr double kBoxHi = 5.0;

/// Translation vector: one N(0, 1) draw per coordinate from `instance_seed`.
std::vector<double> instance_translation(std::size_t dim, std::uint64_t instance_seed);

// Deceptive continuous problems on [-5, 5]^dim, with z = x - translation.

/// z1^2 + z2^2 / (|z| + 1e-9) + sum_{i>2} z_i^2; conditioning diverges at 0.
ProblemInstance deceptive_illcond(std::size_t dim, std::uint64_t instance_seed);
/// r (2 + sin(1 / max(r, 1e-12))) with r = |z|; local minima accumulate at 0.
ProblemInstance deceptive_multimodal(std::size_t dim, std::uint64_t instance_seed);
/// Polar (r, theta) of (z1, z2): r + min(|wrap(theta - 10 ln r)|, pi) / pi
/// + sum_{i>2} z_i^2, and 0 at r = 0. Off-spiral deviation costs 1/r relative
/// to the radial progress, so the corridor thins near the optimum.
ProblemInstance deceptive_path(std::size_t dim, std::uint64_t instance_seed);
ProblemInstance sphere(std::size_t dim, std::uint64_t instance_seed);

double illcond_loss(std::span<const double> z);
double multimodal_loss(std::span<const double> z);
double path_loss(std::span<const double> z);

/// Budgets 25 ... 12800 used for fixed-budget plots.
std::vector<std::size_t> default_budget_grid();

const std::vector<std::string>& suite_ids();
/// "discrete", "deceptive" or "sphere". Throws UnknownId otherwise.
std::vector<ProblemInstance> make_suite(std::string_view suite);

}  // namespace bbo
