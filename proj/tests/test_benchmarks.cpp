#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "bbo/algorithms.hpp"
#include "bbo/benchmarks.hpp"

using namespace bbo;

namespace {

double at(const ProblemInstance& p, const std::vector<double>& x) { return p.objective.loss(x); }

std::vector<double> shifted(const ProblemInstance& p, std::vector<double> z) {
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += p.translation[i];
  return z;
}

std::vector<double> bits(const std::string& s) {
  std::vector<double> x;
  for (char c : s) x.push_back(c == '1' ? 1.0 : 0.0);
  return x;
}

// Disagreeing neighbors counted by listing the cycle's edges explicitly.
double ising_oracle(const std::vector<double>& x) {
  std::set<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = (i + 1) % x.size();
    edges.emplace(std::min(i, j), std::max(i, j));
  }
  double count = 0.0;
  for (auto [i, j] : edges) count += x[i] != x[j];
  return count;
}

}  // namespace

TEST_CASE("default budget grid") {
  const std::vector<std::size_t> expected{25, 37, 50, 75, 87, 100, 200, 400, 800, 1600, 3200, 6400, 12800};
  const auto grid = default_budget_grid();
  CHECK(grid == expected);
  CHECK(grid.size() == 13);
  CHECK(std::is_sorted(grid.begin(), grid.end()));
  CHECK(std::adjacent_find(grid.begin(), grid.end()) == grid.end());
}

TEST_CASE("pseudo-boolean losses") {
  CHECK(at(onemax(7), std::vector<double>(7, 1.0)) == 0.0);
  CHECK(at(onemax(7), std::vector<double>(7, 0.0)) == 7.0);
  CHECK(at(onemax(5), bits("10110")) == 2.0);
  CHECK(at(leadingones(5), bits("11010")) == 3.0);
  CHECK(at(leadingones(5), bits("11111")) == 0.0);
  CHECK(at(leadingones(5), bits("01111")) == 5.0);
  CHECK(at(ising_ring(4), bits("0101")) == 4.0);
  CHECK(at(ising_ring(4), bits("0000")) == 0.0);
  CHECK(at(ising_ring(4), bits("1111")) == 0.0);
  CHECK(at(ising_ring(1), bits("1")) == 0.0);
  CHECK_THROWS_AS(onemax(0), std::invalid_argument);
}

TEST_CASE("ising ring matches the edge-list count on every string of length 8") {
  const auto p = ising_ring(8);
  for (unsigned mask = 0; mask < 256; ++mask) {
    std::vector<double> x(8);
    for (std::size_t i = 0; i < 8; ++i) x[i] = (mask >> i) & 1u;
    REQUIRE(at(p, x) == ising_oracle(x));
    if (mask != 0 && mask != 255) REQUIRE(at(p, x) > 0.0);
  }
}

TEST_CASE("continuous optima and direct substitutions") {
  for (std::size_t dim : {2, 5, 10}) {
    for (std::uint64_t seed : {0, 3}) {
      for (const auto& p : {deceptive_illcond(dim, seed), deceptive_multimodal(dim, seed),
                            deceptive_path(dim, seed), sphere(dim, seed)}) {
        CAPTURE(p.id);
        CHECK(std::abs(at(p, p.optimum)) <= 1e-9);
        CHECK(p.optimum == p.translation);
        CHECK(p.objective.space.size() == dim);
        std::vector<double> e1(dim, 0.0);
        e1[0] = 1.0;
        const double unit = at(p, shifted(p, e1));
        if (p.id.starts_with("multimodal")) {
          CHECK(unit == doctest::Approx(2.0 + std::sin(1.0)));
        } else {
          CHECK(unit == doctest::Approx(1.0).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("translations are seeded normals") {
  CHECK(instance_translation(10, 4) == instance_translation(10, 4));
  CHECK(instance_translation(10, 4) != instance_translation(10, 5));
  CHECK(deceptive_path(5, 2).translation == instance_translation(5, 2));
  const auto big = instance_translation(20000, 9);
  double mean = 0.0, sq = 0.0;
  for (double v : big) {
    mean += v;
    sq += v * v;
  }
  mean /= big.size();
  CHECK(std::abs(mean) < 5.0 / std::sqrt(20000.0));
  CHECK(std::abs(sq / big.size() - 1.0) < 0.05);
}

TEST_CASE("illcond curvature along the second axis grows like 1/t") {
  for (double t : {1e-1, 1e-2, 1e-3}) {
    const double h = t / 100.0;
    auto f = [](double y) {
      const std::vector<double> z{0.0, y, 0.0};
      return illcond_loss(z);
    };
    CHECK(f(t) == doctest::Approx(t * t / (t + 1e-9)).epsilon(1e-12));
    const double curvature = (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
    // d2/dt2 of t^2 / sqrt(t^2) is 0 along the axis, so measure the transverse
    // curvature instead: moving off-axis by s changes the norm.
    const double s = t / 100.0;
    auto g = [t](double x1) {
      const std::vector<double> z{0.0, t, x1};
      return illcond_loss(z) - x1 * x1;
    };
    const double transverse = (g(s) - 2.0 * g(0.0) + g(-s)) / (s * s);
    CHECK(std::abs(curvature) < 1e-3);
    CHECK(transverse == doctest::Approx(-1.0 / t).epsilon(1e-3));
  }
  CHECK(illcond_loss(std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("multimodal has a numerical local minimum near each sin = -1 valley") {
  constexpr double pi = std::numbers::pi;
  auto radial = [](double r) { return multimodal_loss(std::vector<double>{r, 0.0, 0.0}); };
  for (int k : {1, 3, 10, 30, 100}) {
    const double u_k = 2.0 * pi * k + 1.5 * pi;
    const double r_k = 1.0 / u_k;
    CHECK(radial(r_k) == doctest::Approx(r_k).epsilon(1e-12));
    // Scan the valley between the neighboring zeros of sin(1/r).
    const double lo = 1.0 / (u_k + 0.5 * pi), hi = 1.0 / (u_k - 0.5 * pi);
    const int steps = 200000;
    int best = 0;
    for (int i = 1; i <= steps; ++i)
      if (radial(lo + (hi - lo) * i / steps) < radial(lo + (hi - lo) * best / steps)) best = i;
    REQUIRE(best > 0);
    REQUIRE(best < steps);
    const double r_min = lo + (hi - lo) * best / steps;
    const double h = (hi - lo) * 1e-3;
    CHECK(radial(r_min - h) > radial(r_min));
    CHECK(radial(r_min + h) > radial(r_min));
    CHECK(std::abs(r_min - r_k) < 2.0 * r_k / u_k);
    CHECK(radial(r_min) == doctest::Approx(r_k).epsilon(2.0 / u_k));
    // Same minimum along any direction: the loss depends on |z| only.
    CHECK(multimodal_loss(std::vector<double>{0.0, -r_min, 0.0}) == doctest::Approx(radial(r_min)));
  }
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> z(4);
    for (double& v : z) v = rng.uniform(-5.0, 5.0) * std::pow(10.0, -rng.uniform(0.0, 8.0));
    const double r = std::sqrt(z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]);
    const double f = multimodal_loss(z);
    REQUIRE(f >= r * (1.0 - 1e-12));
    REQUIRE(f <= 3.0 * r * (1.0 + 1e-12));
  }
  CHECK(multimodal_loss(std::vector<double>{0.0, 0.0}) == 0.0);
}

TEST_CASE("path loss grows with angular deviation from the spiral") {
  constexpr double pi = std::numbers::pi;
  for (double r : {2.0, 1.0, 0.1, 1e-3}) {
    const double on = 10.0 * std::log(r);
    CHECK(path_loss(std::vector<double>{r * std::cos(on), r * std::sin(on)}) == doctest::Approx(r).epsilon(1e-9));
    double previous = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double dev = pi * i / 200.0 * (1.0 - 1e-12);
      for (double sgn : {1.0, -1.0}) {
        const double theta = on + sgn * dev;
        const std::vector<double> z{r * std::cos(theta), r * std::sin(theta), 0.0};
        const double f = path_loss(z);
        if (sgn > 0) {
          REQUIRE(f >= previous - 1e-12);
          previous = f;
        }
        REQUIRE(f == doctest::Approx(r + dev / pi).epsilon(1e-9));
      }
    }
  }
  CHECK(path_loss(std::vector<double>{0.0, 0.0, 0.0}) == 0.0);
  CHECK(path_loss(std::vector<double>{0.0, 0.0, 2.0}) == 4.0);
}

TEST_CASE("sphere gradient matches finite differences") {
  const auto p = sphere(5, 1);
  Rng rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(kBoxLo, kBoxHi);
    for (std::size_t i = 0; i < 5; ++i) {
      const double h = 1e-6;
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (at(p, xp) - at(p, xm)) / (2.0 * h);
      CHECK(fd == doctest::Approx(2.0 * (x[i] - p.translation[i])).epsilon(1e-5));
    }
  }
}

TEST_CASE("continuous losses stay finite and non-negative on the box") {
  Rng rng(5);
  for (const auto& suite : suite_ids()) {
    for (const auto& p : make_suite(suite)) {
      for (int i = 0; i < 200; ++i) {
        const auto c = sample_uniform(p.objective.space, rng);
        const double f = p.objective.loss(c.values);
        REQUIRE(std::isfinite(f));
        REQUIRE(f >= 0.0);
      }
    }
  }
}

TEST_CASE("suites") {
  CHECK(make_suite("discrete").size() == 9);
  CHECK(make_suite("deceptive").size() == 45);
  CHECK(make_suite("sphere").size() == 3);
  CHECK_THROWS_AS(make_suite("bbob"), UnknownId);
  std::set<std::string> ids;
  for (const auto& p : make_suite("deceptive")) ids.insert(p.id);
  CHECK(ids.size() == 45);
  const auto a = make_suite("deceptive"), b = make_suite("deceptive");
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].translation == b[i].translation);
}
