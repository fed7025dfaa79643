#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "bbo/cli.hpp"
#include "bbo/image.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "bbo");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = bbo::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bbo-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string body(const fs::path& path) {
  std::istringstream in(slurp(path));
  std::string line, text;
  while (std::getline(in, line))
    if (!line.starts_with("#")) text += line + "\n";
  return text;
}

std::size_t rows(const fs::path& path) {
  std::istringstream in(body(path));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n - 1;
}

struct SeedEnv {
  explicit SeedEnv(const char* value) { ::setenv("BBO_SEED", value, 1); }
  ~SeedEnv() { ::unsetenv("BBO_SEED"); }
};

}  // namespace

TEST_CASE("bench run") {
  ::unsetenv("BBO_SEED");
  const auto dir = scratch("bench");
  const auto r = run({"bench", "run", "--suite", "sphere", "--algos", "rs", "--budgets", "25", "--seeds", "1",
                      "--out", dir.string()});
  CHECK(r.code == 0);
  CHECK(rows(dir / "results.csv") == 3);
  const std::string text = slurp(dir / "results.csv");
  CHECK(text.starts_with("# bbo " + bbo::cli::version() + "\n# config: {"));
  CHECK(fs::exists(dir / "scores.csv"));
  CHECK(fs::exists(dir / "charts" / "normalized.svg"));
  fs::remove_all(dir);
}

TEST_CASE("bench usage errors") {
  const auto dir = scratch("bench-err");
  const auto unknown = run({"bench", "run", "--suite", "sphere", "--algos", "rs,warp-drive", "--out", dir.string()});
  CHECK(unknown.code == 1);
  CHECK(unknown.err.find("warp-drive") != std::string::npos);
  CHECK(unknown.err.find("one-fifth-es") != std::string::npos);
  CHECK(unknown.err.find("algo1=gsm-supersmooth-lognormal") != std::string::npos);
  CHECK(run({"bench", "run", "--suite", "bbob", "--algos", "rs", "--out", dir.string()}).code == 1);
  CHECK(run({"bench", "run", "--suite", "sphere", "--algos", "rs", "--budgets", "0", "--out", dir.string()}).code ==
        1);
  CHECK(run({"bench", "run", "--suite", "sphere", "--algos", "rs", "--seed", "-3", "--out", dir.string()}).code == 1);
  CHECK(run({"bench", "run", "--suite", "sphere", "--algos", "rs"}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  fs::remove_all(dir);
}

TEST_CASE("partial failures exit 2") {
  const auto dir = scratch("partial");
  const auto r =
      run({"bench", "run", "--suite", "discrete", "--algos", "rs,one-fifth-es", "--budgets", "10", "--out", dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("warning") != std::string::npos);
  CHECK(rows(dir / "results.csv") == 18);
  fs::remove_all(dir);
}

TEST_CASE("default budgets are the 13-value grid") {
  const auto dir = scratch("defaults");
  const auto r = run({"bench", "run", "--suite", "sphere", "--algos", "rs", "--out", dir.string()});
  REQUIRE(r.code == 0);
  CHECK(rows(dir / "results.csv") == 3 * 13);
  CHECK(slurp(dir / "results.csv").find("\"budgets\":[25,37,50,75,87,100,200,400,800,1600,3200,6400,12800]") !=
        std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("rank") {
  const auto dir = scratch("rank");
  REQUIRE(run({"bench", "run", "--suite", "sphere", "--algos", "rs,lognormal", "--budgets", "25,50", "--seeds", "2",
               "--out", (dir / "bench").string()})
              .code == 0);
  const auto r = run({"rank", "--results", (dir / "bench" / "results.csv").string(), "--out", (dir / "r").string()});
  CHECK(r.code == 0);
  CHECK(body(dir / "r" / "scores.csv") == body(dir / "bench" / "scores.csv"));
  CHECK(rows(dir / "r" / "stability.csv") == 2 * 3);

  fs::create_directories(dir);
  std::ofstream(dir / "solo.csv") << "algo,problem,budget,seed,final_loss\nrs,p,10,0,1.5\n";
  CHECK(run({"rank", "--results", (dir / "solo.csv").string(), "--out", (dir / "solo").string()}).code == 0);
  CHECK(body(dir / "solo" / "scores.csv") == "algo,score,rank\nrs,0,0\n");

  std::ofstream(dir / "empty.csv") << "";
  CHECK(run({"rank", "--results", (dir / "empty.csv").string(), "--out", dir.string()}).code == 1);
  std::ofstream(dir / "bad.csv") << "algo,problem,budget,seed,final_loss\nrs,p,10,0,1\nrs,p,ten,0,1\n";
  const auto bad = run({"rank", "--results", (dir / "bad.csv").string(), "--out", dir.string()});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("line 3") != std::string::npos);
  CHECK(run({"rank", "--results", (dir / "missing.csv").string(), "--out", dir.string()}).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("rank reproduces a hand-scored table") {
  const auto dir = scratch("rank-oracle");
  fs::create_directories(dir);
  // A beats B and C on both cells; B and C split the cells.
  std::ofstream(dir / "t.csv") << "algo,problem,budget,seed,final_loss\n"
                                  "A,p,1,0,0\nB,p,1,0,1\nC,p,1,0,2\n"
                                  "A,p,2,0,0\nB,p,2,0,2\nC,p,2,0,1\n";
  REQUIRE(run({"rank", "--results", (dir / "t.csv").string(), "--out", dir.string()}).code == 0);
  // score_A = (0 + 1 + 1) / 3, score_B = score_C = (0 + 0 + 0.5) / 3
  CHECK(body(dir / "scores.csv") == "algo,score,rank\nA,0.6666666666666666,0\nB,0.16666666666666666,1\n"
                                    "C,0.16666666666666666,2\n");
  fs::remove_all(dir);
}

TEST_CASE("attack run") {
  const auto dir = scratch("attack");
  const auto r = run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:10", "--algo", "rs",
                      "--budget", "100", "--out", dir.string(), "--save-images"});
  CHECK(r.code == 0);
  CHECK(rows(dir / "attack.csv") == 10);
  CHECK(r.out.find("images 10") != std::string::npos);
  std::size_t saved = 0;
  if (fs::exists(dir / "images"))
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "images")) ++saved;
  const std::string csv = body(dir / "attack.csv");
  std::size_t expected = 0;
  std::istringstream lines(csv);
  for (std::string line; std::getline(lines, line);)
    expected += line.find(",true,") != std::string::npos || line.find(",false,") != std::string::npos;
  CHECK(expected > 0);
  CHECK(saved == expected);

  const auto alias = run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:2", "--algo", "algo1",
                          "--budget", "50", "--out", (dir / "alias").string()});
  CHECK(alias.code == 0);
  CHECK(body(dir / "alias" / "attack.csv").find(",gsm-supersmooth-lognormal,50,") != std::string::npos);

  CHECK(run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:2", "--linf", "0", "--out",
             dir.string()})
            .code == 1);
  CHECK(run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:2", "--algo", "nope", "--out",
             dir.string()})
            .code == 1);
  CHECK(run({"attack", "run", "--detector", "magic:1", "--images", "synthetic:2", "--out", dir.string()}).code == 1);
  CHECK(run({"attack", "run", "--detector", "builtin:0", "--images", (dir / "nowhere").string(), "--out",
             dir.string()})
            .code == 1);
  fs::remove_all(dir);
}

TEST_CASE("attack on an image directory with unreadable files") {
  const auto dir = scratch("ppm");
  fs::create_directories(dir / "in");
  const auto fakes = bbo::generate_synthetic_fakes(2, 9);
  bbo::write_ppm(dir / "in" / "a.ppm", fakes[0]);
  std::ofstream(dir / "in" / "b.ppm") << "not a ppm";
  bbo::write_ppm(dir / "in" / "c.ppm", fakes[1]);
  std::ofstream(dir / "in" / "notes.txt") << "ignored";
  const auto r = run({"attack", "run", "--detector", "builtin:0", "--images", (dir / "in").string(), "--algo", "rs",
                      "--budget", "30", "--out", (dir / "out").string()});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning: skipping") != std::string::npos);
  const std::string csv = body(dir / "out" / "attack.csv");
  const auto a = csv.find("\na,"), b = csv.find("\nb,"), c = csv.find("\nc,");
  REQUIRE(a != std::string::npos);
  REQUIRE(b != std::string::npos);
  REQUIRE(c != std::string::npos);
  CHECK(a < b);
  CHECK(b < c);
  CHECK(csv.find("b,rs,30,0.03,0,error,0,nan,nan") != std::string::npos);

  fs::remove(dir / "in" / "a.ppm");
  fs::remove(dir / "in" / "c.ppm");
  CHECK(run({"attack", "run", "--detector", "builtin:0", "--images", (dir / "in").string(), "--out",
             (dir / "out").string()})
            .code == 2);
  fs::remove_all(dir);
}

TEST_CASE("canonical config round trip") {
  bbo::cli::RunConfig c;
  c.command = "attack";
  c.out_dir = "runs/x";
  c.seed = 12345678901234ULL;
  c.detector = "subprocess:python3 det.py --flag \"q\"";
  c.images = "synthetic:5";
  c.algo = "algo2";
  c.linf = 0.05;
  c.kernel_sigma = 2.5;
  c.early_stop = false;
  const auto back = bbo::cli::RunConfig::from_canonical(c.canonical());
  CHECK(back == c);
  CHECK(back.canonical() == c.canonical());

  bbo::cli::RunConfig b;
  b.command = "bench";
  b.suite = "deceptive";
  b.algos = {"rs", "lognormal"};
  b.budgets = {25, 50};
  b.seeds = 3;
  CHECK(bbo::cli::RunConfig::from_canonical(b.canonical()) == b);
  b.parallelism = 9;
  CHECK(b.canonical() == bbo::cli::RunConfig::from_canonical(b.canonical()).canonical());
  CHECK(b.canonical().find("parallelism") == std::string::npos);
  // Keys come out sorted.
  CHECK(b.canonical().find("\"algos\"") < b.canonical().find("\"budgets\""));
}

TEST_CASE("outputs do not depend on parallelism") {
  const auto dir = scratch("det");
  for (const char* p : {"1", "4"}) {
    REQUIRE(run({"bench", "run", "--suite", "sphere", "--algos", "rs,lognormal,algo4", "--budgets", "25,50", "--seeds",
                 "2", "--parallelism", p, "--out", (dir / (std::string("b") + p)).string()})
                .code == 0);
    REQUIRE(run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:6", "--algo", "algo1", "--budget",
                 "60", "--parallelism", p, "--out", (dir / (std::string("a") + p)).string()})
                .code == 0);
  }
  CHECK(body(dir / "b1" / "results.csv") == body(dir / "b4" / "results.csv"));
  CHECK(body(dir / "b1" / "scores.csv") == body(dir / "b4" / "scores.csv"));
  CHECK(body(dir / "a1" / "attack.csv") == body(dir / "a4" / "attack.csv"));
  // The header names the output directory, so compare after a rerun into the same place.
  const std::string first = slurp(dir / "a1" / "attack.csv");
  REQUIRE(run({"attack", "run", "--detector", "builtin:0", "--images", "synthetic:6", "--algo", "algo1", "--budget",
               "60", "--parallelism", "3", "--out", (dir / "a1").string()})
              .code == 0);
  CHECK(slurp(dir / "a1" / "attack.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("BBO_SEED overrides --seed") {
  const auto dir = scratch("env");
  const std::vector<std::string> base{"bench", "run", "--suite", "sphere", "--algos", "rs", "--budgets", "25"};
  auto with = [&](const std::string& seed, const std::string& out) {
    auto args = base;
    args.insert(args.end(), {"--seed", seed, "--out", (dir / out).string()});
    return run(args).code;
  };
  REQUIRE(with("7", "plain7") == 0);
  REQUIRE(with("8", "plain8") == 0);
  {
    SeedEnv env("7");
    REQUIRE(with("8", "env7") == 0);
  }
  CHECK(body(dir / "env7" / "results.csv") == body(dir / "plain7" / "results.csv"));
  CHECK(body(dir / "plain7" / "results.csv") != body(dir / "plain8" / "results.csv"));
  CHECK(slurp(dir / "env7" / "results.csv").find("\"seed\":7") != std::string::npos);
  {
    SeedEnv env("not-a-number");
    CHECK(with("8", "bad") == 1);
  }
  fs::remove_all(dir);
}
