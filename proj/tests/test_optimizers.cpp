#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "bbo/algorithms.hpp"
#include "bbo/benchmarks.hpp"

using namespace bbo;

namespace {

// Replays a fixed list of losses, one per evaluation, and records the points.
struct Script {
  std::deque<double> losses;
  std::vector<std::vector<double>> seen;

  LossFn fn() {
    return [this](std::span<const double> x) {
      seen.emplace_back(x.begin(), x.end());
      const double v = losses.front();
      losses.pop_front();
      return v;
    };
  }
};

double constant_loss(std::span<const double>) { return 1.0; }

bool non_increasing(const std::vector<double>& trace) {
  return std::adjacent_find(trace.begin(), trace.end(), std::less<>()) == trace.end();
}

}  // namespace

TEST_CASE("rate update closed form") {
  CHECK(lognormal_update_rate(0.2, 0.0, 0.22) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(lognormal_update_rate(0.5, 1.0, 0.22) == doctest::Approx(1.0 / (1.0 + std::exp(0.22))));
  CHECK(lognormal_update_rate(0.5, 1.0, 0.22) == doctest::Approx(0.4452).epsilon(1e-4));
  CHECK(lognormal_update_rate(0.2, 200.0, 0.22) < 1e-15);
  CHECK(lognormal_update_rate(0.2, -200.0, 0.22) > 1.0 - 1e-15);
  double prev = 1.0;
  for (double q = -5.0; q <= 5.0; q += 0.25) {
    const double p = lognormal_update_rate(0.3, q);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("rate update preserves the median") {
  Rng rng(123);
  std::vector<double> rates(100000);
  for (double& r : rates) r = lognormal_update_rate(0.2, rng.normal());
  std::nth_element(rates.begin(), rates.begin() + 50000, rates.end());
  CHECK(std::abs(rates[50000] - 0.2) < 0.01);
}

TEST_CASE("presets") {
  auto check = [](LogNormalConfig c, double p, std::size_t lambda) {
    CHECK(c.initial_p == p);
    CHECK(c.lambda == lambda);
    CHECK(c.gamma == 0.22);
  };
  check(LogNormalConfig::standard(), 0.2, 12);
  check(LogNormalConfig::big(), 0.2, 120);
  check(LogNormalConfig::huge(), 0.2, 1200);
  check(LogNormalConfig::small(), 0.2, 4);
  check(LogNormalConfig::x(), 0.8, 12);
  check(LogNormalConfig::xsmall(), 0.8, 4);
}

TEST_CASE("first best index") {
  const std::vector<double> a{3.0, 1.0, 1.0};
  CHECK(first_best_index(a) == 1);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> b{nan, 2.0, nan, 2.0};
  CHECK(first_best_index(b) == 1);
  CHECK_FALSE(first_best_index(std::span<const double>{}).has_value());
}

TEST_CASE("generation keeps the first best offspring and its rate") {
  const auto space = SearchSpace::booleans(30);
  Script script{{2.0, 3.0, 1.0, 1.0}, {}};
  const Objective obj{space, script.fn()};
  Evaluator ev(obj, 4);
  LogNormalEA ea(space, {0.2, 3});
  Rng rng(77);
  ea.start(ev, rng);

  // Replay the generation's draws on a copy of the stream.
  Rng replay = rng;
  std::vector<double> rates;
  Candidate parent = ea.parent();
  for (int i = 0; i < 3; ++i) {
    rates.push_back(std::clamp(lognormal_update_rate(0.2, replay.normal()), rate_floor(30), 1.0 - rate_floor(30)));
    const std::size_t ell = sample_binomial_positive(30, rates.back(), replay);
    mutate(space, parent, ell, replay);
  }

  ea.step(ev, rng);
  CHECK(ev.evaluations() == 4);
  CHECK(*ea.parent().loss == 1.0);
  CHECK(ea.parent().values == script.seen[2]);
  CHECK(ea.rate() == rates[1]);
}

TEST_CASE("ties with the parent are accepted") {
  const auto space = SearchSpace::booleans(20);
  const Objective obj{space, constant_loss};
  Evaluator ev(obj, 200);
  LogNormalEA ea(space, {0.2, 1});
  Rng rng(5);
  ea.start(ev, rng);
  while (!ev.exhausted()) {
    const auto before = ea.parent().values;
    ea.step(ev, rng);
    CHECK(ea.parent().values != before);
    CHECK(ea.rate() > 0.0);
    CHECK(ea.rate() < 1.0);
  }
}

TEST_CASE("log-normal EA solves small OneMax") {
  const auto problem = onemax(20);
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed)
    solved += run("lognormal", problem.objective, 5000, seed).final_loss == 0.0;
  CHECK(solved == 30);
}

TEST_CASE("every registered algorithm honours the run contract") {
  const auto bits = onemax(12);
  const auto cont = sphere(3, 0);
  for (const auto& id : base_algorithm_ids()) {
    const Objective& obj = id == "one-fifth-es" ? cont.objective : bits.objective;
    CAPTURE(id);
    const auto one = run(id, obj, 1, 9);
    CHECK(one.evaluations == 1);
    CHECK(one.trace.size() == 1);
    CHECK(one.final_loss == one.trace.front());

    const auto a = run(id, obj, 300, 4);
    const auto b = run(id, obj, 300, 4);
    CHECK(a.evaluations == 300);
    CHECK(a.trace.size() == 300);
    CHECK(non_increasing(a.trace));
    CHECK(a.trace == b.trace);
    CHECK(a.best.values == b.best.values);
    CHECK(a.final_loss == a.trace.back());
    CHECK(obj.space.contains(a.best.values));
  }
}

TEST_CASE("single uniform sample for budget 1") {
  const auto problem = sphere(4, 1);
  const auto rec = run("rs", problem.objective, 1, 3);
  Rng rng(3);
  const auto x = sample_uniform(problem.objective.space, rng);
  CHECK(rec.final_loss == problem.objective.loss(x.values));
}

TEST_CASE("registry") {
  CHECK(parse_algorithm("algo1").id == "gsm-supersmooth-lognormal");
  const auto spec = parse_algorithm("gsm-supersmooth-lognormal");
  CHECK(spec.base == "lognormal");
  CHECK(spec.loss_modifier == LossModifier::GSM);
  CHECK(spec.smooth == SmoothLevel::Super);
  CHECK(parse_algorithm("algo6").id == "g-big-lognormal");
  CHECK(parse_algorithm("sm-zetasmooth-rs").smooth == SmoothLevel::Zeta);
  CHECK_FALSE(parse_algorithm("rs").smooth.has_value());
  CHECK_THROWS_AS(parse_algorithm("nope"), UnknownId);
  CHECK_THROWS_AS(parse_algorithm("smooth-gsm-lognormal"), UnknownId);
  CHECK_THROWS_AS(parse_algorithm("oln"), UnknownId);
  try {
    parse_algorithm("bogus");
  } catch (const UnknownId& e) {
    CHECK(std::string(e.what()).find("xsmall-lognormal") != std::string::npos);
  }
  CHECK_THROWS_AS(run("bogus", onemax(3).objective, 10, 0), UnknownId);
}

TEST_CASE("adaptive rate doubles on success and halves on failure") {
  const auto space = SearchSpace::booleans(40);
  {
    const Objective obj{space, constant_loss};
    Evaluator ev(obj, 20);
    AdaptiveEA ea(space, {.initial_p = 0.01});
    Rng rng(1);
    ea.start(ev, rng);
    double expected = 0.01;
    while (!ev.exhausted()) {
      ea.step(ev, rng);
      expected = std::min(0.5, expected * 2.0);
      CHECK(ea.rate() == doctest::Approx(expected));
    }
    CHECK(ea.rate() == 0.5);
  }
  {
    double counter = 0.0;
    const Objective obj{space, [&](std::span<const double>) { return counter++; }};
    Evaluator ev(obj, 20);
    AdaptiveEA ea(space, {.initial_p = 0.4});
    Rng rng(2);
    ea.start(ev, rng);
    double expected = 0.4;
    while (!ev.exhausted()) {
      ea.step(ev, rng);
      expected = std::max(1.0 / 160.0, expected / 2.0);
      CHECK(ea.rate() == doctest::Approx(expected));
    }
    CHECK(ea.rate() == doctest::Approx(ea.p_min()));
  }
}

TEST_CASE("adaptive rate stays within its clamps") {
  const auto problem = leadingones(30);
  Evaluator ev(problem.objective, 3000);
  AdaptiveEA ea(problem.objective.space);
  Rng rng(3);
  ea.start(ev, rng);
  while (!ev.exhausted()) {
    ea.step(ev, rng);
    REQUIRE(ea.rate() >= ea.p_min());
    REQUIRE(ea.rate() <= ea.p_max());
  }
}

TEST_CASE("lengler schedule") {
  CHECK(lengler_strength(20, 0) == 10);
  CHECK(lengler_strength(20, 19) == 1);
  CHECK(lengler_strength(20, 1000) == 1);
  for (std::size_t t = 0; t < 100; ++t) CHECK(lengler_strength(37, t + 1) <= lengler_strength(37, t));
}

TEST_CASE("lengler solves OneMax") {
  const auto problem = onemax(50);
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed)
    solved += run("lengler", problem.objective, 10000, seed).final_loss == 0.0;
  CHECK(solved == 30);
}

TEST_CASE("anisotropic offspring") {
  const auto space = SearchSpace::booleans(25);
  Rng rng(4);
  const auto parent = sample_uniform(space, rng);
  std::vector<double> rates(25, 0.2), child_rates;
  for (int rep = 0; rep < 500; ++rep) {
    // With a zero learning rate every draw acts like q = 0.
    const auto child = AnisotropicEA::make_offspring(space, parent, rates, child_rates, 0.0, rate_floor(25), rng);
    CHECK(child_rates == rates);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < 25; ++i) changed += child.values[i] != parent.values[i];
    CHECK(changed >= 1);
  }
  std::vector<double> low(25, 0.001);
  for (int rep = 0; rep < 200; ++rep) {
    const auto child = AnisotropicEA::make_offspring(space, parent, low, child_rates, 0.22, rate_floor(25), rng);
    CHECK(child.values != parent.values);
  }
}

TEST_CASE("anisotropic rates stay inside (0, 1)") {
  const auto problem = onemax(30);
  Evaluator ev(problem.objective, 4000);
  AnisotropicEA ea(problem.objective.space);
  for (double r : ea.rates()) CHECK(r == 0.2);
  Rng rng(6);
  ea.start(ev, rng);
  while (!ev.exhausted()) {
    ea.step(ev, rng);
    for (double r : ea.rates()) {
      REQUIRE(r > 0.0);
      REQUIRE(r < 1.0);
    }
  }
}

TEST_CASE("one-fifth ES step size rule") {
  const auto space = SearchSpace::reals(3, -1.0, 1.0);
  const Objective flat{space, constant_loss};
  Evaluator ev(flat, 10);
  OneFifthES es(space);
  CHECK(es.sigma() == doctest::Approx(2.0 / 6.0));
  Rng rng(0);
  es.start(ev, rng);
  double sigma = es.sigma();
  es.step(ev, rng);
  CHECK(es.sigma() == doctest::Approx(sigma * std::exp(1.0 / 3.0)));

  double counter = 0.0;
  const Objective worse{space, [&](std::span<const double>) { return counter++; }};
  Evaluator ev2(worse, 10);
  OneFifthES es2(space);
  es2.start(ev2, rng);
  sigma = es2.sigma();
  es2.step(ev2, rng);
  CHECK(es2.sigma() == doctest::Approx(sigma * std::exp(-1.0 / 12.0)));
  CHECK_THROWS_AS(OneFifthES(SearchSpace::booleans(3)), std::invalid_argument);
}

TEST_CASE("one-fifth ES clamps to the box and solves the sphere") {
  const auto narrow = SearchSpace::reals(4, 0.0, 0.01);
  const Objective obj{narrow, [](std::span<const double> x) { return -std::accumulate(x.begin(), x.end(), 0.0); }};
  const auto rec = run("one-fifth-es", obj, 500, 1);
  CHECK(narrow.contains(rec.best.values));

  const auto problem = sphere(5, 0);
  int good = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) good += run("one-fifth-es", problem.objective, 2000, seed).final_loss < 1e-3;
  CHECK(good >= 25);
}

TEST_CASE("budget is hit mid-generation") {
  const auto problem = onemax(10);
  const auto rec = run("big-lognormal", problem.objective, 50, 2);
  CHECK(rec.evaluations == 50);
}
