#include "bbo/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bbo/algorithms.hpp"
#include "bbo/rng.hpp"

namespace bbo {

ProblemInstance onemax(std::size_t n) {
  if (n < 1) throw std::invalid_argument("onemax needs n >= 1");
  auto loss = [n](std::span<const double> x) {
    double ones = 0.0;
    for (double v : x) ones += v;
    return static_cast<double>(n) - ones;
  };
  return {"onemax-" + std::to_string(n), Objective{SearchSpace::booleans(n), loss}, {}, 0,
          std::vector<double>(n, 1.0)};
}

ProblemInstance leadingones(std::size_t n) {
  if (n < 1) throw std::invalid_argument("leadingones needs n >= 1");
  auto loss = [n](std::span<const double> x) {
    std::size_t prefix = 0;
    while (prefix < x.size() && x[prefix] == 1.0) ++prefix;
    return static_cast<double>(n - prefix);
  };
  return {"leadingones-" + std::to_string(n), Objective{SearchSpace::booleans(n), loss}, {}, 0,
          std::vector<double>(n, 1.0)};
}

ProblemInstance ising_ring(std::size_t n) {
  if (n < 1) throw std::invalid_argument("ising ring needs n >= 1");
  auto loss = [](std::span<const double> x) {
    double disagreements = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] != x[(i + 1) % x.size()]) disagreements += 1.0;
    return disagreements;
  };
  return {"ising_ring-" + std::to_string(n), Objective{SearchSpace::booleans(n), loss}, {}, 0,
          std::vector<double>(n, 0.0)};
}

std::vector<double> instance_translation(std::size_t dim, std::uint64_t instance_seed) {
  Rng rng(derive_seed(instance_seed, "translation"));
  std::vector<double> t(dim);
  for (double& v : t) v = rng.normal();
  return t;
}

double illcond_loss(std::span<const double> z) {
  double norm2 = 0.0;
  for (double v : z) norm2 += v * v;
  double loss = z[0] * z[0] + z[1] * z[1] / (std::sqrt(norm2) + 1e-9);
  for (std::size_t i = 2; i < z.size(); ++i) loss += z[i] * z[i];
  return loss;
}

double multimodal_loss(std::span<const double> z) {
  double norm2 = 0.0;
  for (double v : z) norm2 += v * v;
  const double r = std::sqrt(norm2);
  return r * (2.0 + std::sin(1.0 / std::max(r, 1e-12)));
}

double path_loss(std::span<const double> z) {
  constexpr double pi = std::numbers::pi;
  const double r = std::hypot(z[0], z[1]);
  double loss = r;
  if (r > 0.0) {
    const double target = 10.0 * std::log(std::max(r, 1e-12));
    const double deviation = std::abs(std::remainder(std::atan2(z[1], z[0]) - target, 2.0 * pi));
    loss += std::min(deviation, pi) / pi;
  }
  for (std::size_t i = 2; i < z.size(); ++i) loss += z[i] * z[i];
  return loss;
}

namespace {

using ShiftedLoss = double (*)(std::span<const double>);

ProblemInstance translated(std::string family, std::size_t dim, std::size_t min_dim, std::uint64_t instance_seed,
                           ShiftedLoss f) {
  if (dim < min_dim) throw std::invalid_argument(family + " needs dim >= " + std::to_string(min_dim));
  std::vector<double> t = instance_translation(dim, instance_seed);
  auto loss = [t, f](std::span<const double> x) {
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - t[i];
    return f(z);
  };
  std::string id = family + "-d" + std::to_string(dim) + "-i" + std::to_string(instance_seed);
  return {std::move(id), Objective{SearchSpace::reals(dim, kBoxLo, kBoxHi), loss}, t, instance_seed, t};
}

double sphere_loss(std::span<const double> z) {
  double s = 0.0;
  for (double v : z) s += v * v;
  return s;
}

}  // namespace

ProblemInstance deceptive_illcond(std::size_t dim, std::uint64_t instance_seed) {
  return translated("illcond", dim, 2, instance_seed, illcond_loss);
}

ProblemInstance deceptive_multimodal(std::size_t dim, std::uint64_t instance_seed) {
  return translated("multimodal", dim, 1, instance_seed, multimodal_loss);
}

ProblemInstance deceptive_path(std::size_t dim, std::uint64_t instance_seed) {
  return translated("path", dim, 2, instance_seed, path_loss);
}

ProblemInstance sphere(std::size_t dim, std::uint64_t instance_seed) {
  return translated("sphere", dim, 1, instance_seed, sphere_loss);
}

std::vector<std::size_t> default_budget_grid() {
  return {25, 37, 50, 75, 87, 100, 200, 400, 800, 1600, 3200, 6400, 12800};
}

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = {"discrete", "deceptive", "sphere"};
  return ids;
}

std::vector<ProblemInstance> make_suite(std::string_view suite) {
  std::vector<ProblemInstance> problems;
  if (suite == "discrete") {
    for (auto make : {onemax, leadingones, ising_ring})
      for (std::size_t n : {25, 50, 100}) problems.push_back(make(n));
  } else if (suite == "deceptive") {
    for (auto make : {deceptive_illcond, deceptive_multimodal, deceptive_path})
      for (std::size_t dim : {2, 5, 10})
        for (std::uint64_t instance = 0; instance < 5; ++instance) problems.push_back(make(dim, instance));
  } else if (suite == "sphere") {
    for (std::size_t dim : {2, 5, 10}) problems.push_back(sphere(dim, 0));
  } else {
    std::string valid;
    for (const auto& id : suite_ids()) valid += " " + id;
    throw UnknownId("unknown suite '" + std::string(suite) + "'\nvalid suites:" + valid);
  }
  return problems;
}

}  // namespace bbo
