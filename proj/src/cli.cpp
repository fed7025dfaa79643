#include "bbo/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "bbo/algorithms.hpp"
#include "bbo/attack.hpp"
#include "bbo/benchmarks.hpp"
#include "bbo/harness.hpp"
#include "bbo/image.hpp"

namespace bbo::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, sep))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || text.front() == '-')
    throw UsageError(what + " must be a non-negative integer, got '" + text + "'");
  return v;
}

std::vector<std::size_t> parse_budgets(const std::string& text) {
  if (text == "default") return default_budget_grid();
  std::vector<std::size_t> budgets;
  for (const auto& part : split(text, ',')) {
    const auto b = parse_u64(part, "budget");
    if (b == 0) throw UsageError("budgets must be positive");
    budgets.push_back(static_cast<std::size_t>(b));
  }
  if (budgets.empty()) throw UsageError("no budgets given");
  return budgets;
}

std::ofstream open_output(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string sanitize_id(std::string id) {
  for (char& c : id)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = '_';
  return id;
}

}  // namespace

std::string version() { return BBO_VERSION; }

std::string RunConfig::canonical() const {
  json j;
  j["command"] = command;
  j["out"] = out_dir;
  j["seed"] = seed;
  if (command == "bench") {
    j["suite"] = suite;
    j["algos"] = algos;
    j["budgets"] = budgets;
    j["seeds"] = seeds;
    j["traces"] = traces;
  } else if (command == "rank") {
    j["results"] = results;
  } else if (command == "attack") {
    j["detector"] = detector;
    j["images"] = images;
    j["algo"] = algo;
    j["budget"] = budget;
    j["linf"] = linf;
    j["early_stop"] = early_stop;
    j["save_images"] = save_images;
    j["kernel_sigma"] = kernel_sigma ? json(*kernel_sigma) : json(nullptr);
  }
  return j.dump();
}

RunConfig RunConfig::from_canonical(const std::string& text) {
  const json j = json::parse(text);
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.out_dir = j.at("out").get<std::string>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (c.command == "bench") {
    c.suite = j.at("suite").get<std::string>();
    c.algos = j.at("algos").get<std::vector<std::string>>();
    c.budgets = j.at("budgets").get<std::vector<std::size_t>>();
    c.seeds = j.at("seeds").get<std::size_t>();
    c.traces = j.at("traces").get<bool>();
  } else if (c.command == "rank") {
    c.results = j.at("results").get<std::string>();
  } else if (c.command == "attack") {
    c.detector = j.at("detector").get<std::string>();
    c.images = j.at("images").get<std::string>();
    c.algo = j.at("algo").get<std::string>();
    c.budget = j.at("budget").get<std::size_t>();
    c.linf = j.at("linf").get<double>();
    c.early_stop = j.at("early_stop").get<bool>();
    c.save_images = j.at("save_images").get<bool>();
    if (!j.at("kernel_sigma").is_null()) c.kernel_sigma = j.at("kernel_sigma").get<double>();
  } else {
    throw std::invalid_argument("unknown command '" + c.command + "'");
  }
  return c;
}

std::string output_header(const RunConfig& config) {
  return "bbo " + version() + "\nconfig: " + config.canonical() + "\n";
}

int cmd_bench(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<ProblemInstance> problems;
  try {
    problems = make_suite(config.suite);
    for (const auto& a : config.algos) parse_algorithm(a);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (config.algos.empty()) {
    err << "error: no algorithms given\n" << valid_algorithm_help() << "\n";
    return kUsage;
  }

  GridConfig grid;
  grid.algos = config.algos;
  grid.budgets = config.budgets;
  grid.seeds = config.seeds;
  grid.parallelism = config.parallelism;
  grid.global_seed = config.seed;
  grid.record_traces = config.traces;
  const auto records = run_grid(grid, problems);

  std::size_t failed = 0;
  for (const auto& r : records)
    if (r.error) {
      ++failed;
      err << "warning: " << r.algo << " on " << r.problem << " (budget " << r.budget << ", seed " << r.seed
          << ") failed: " << *r.error << "\n";
    }

  ScoreTable scores;
  try {
    scores = compute_scores(records);
  } catch (const std::exception& e) {
    err << "error: cannot score results: " << e.what() << "\n";
    auto csv = open_output(fs::path(config.out_dir) / "results.csv");
    write_comment_header(csv, output_header(config));
    write_results_csv(csv, records);
    return kPartial;
  }
  const ReportFiles files = emit_report(records, scores, config.out_dir, output_header(config));
  out << records.size() << " runs (" << failed << " failed); results in " << files.results_csv.string() << "\n";
  for (std::size_t i = 0; i < scores.algos.size(); ++i)
    out << "  " << scores.algos[i] << ": score " << format_double(scores.score[i]) << ", rank " << scores.rank[i]
        << "\n";
  return failed ? kPartial : kOk;
}

int cmd_rank(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<RunRecord> records;
  try {
    std::ifstream in(config.results, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + config.results);
    records = read_results_csv(in);
  } catch (const CsvError& e) {
    err << "error: " << config.results << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  ScoreTable scores;
  try {
    scores = compute_scores(records);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  const std::string header = output_header(config);
  const fs::path out_dir(config.out_dir);
  {
    auto csv = open_output(out_dir / "scores.csv");
    write_comment_header(csv, header);
    write_scores_csv(csv, scores);
  }
  {
    const MeanLossTable table = mean_losses(records);
    auto csv = open_output(out_dir / "stability.csv");
    write_comment_header(csv, header);
    bool first = true;
    for (const auto& a : scores.algos)
      for (const auto& b : scores.algos) {
        if (a == b) continue;
        write_stability_csv(csv, a, b, stability_report(table, a, b), first);
        first = false;
      }
    if (first) write_stability_csv(csv, "", "", {});
  }
  for (std::size_t i = 0; i < scores.algos.size(); ++i)
    out << scores.algos[i] << ": score " << format_double(scores.score[i]) << ", rank " << scores.rank[i] << "\n";
  return kOk;
}

int cmd_attack(const RunConfig& config, std::ostream& out, std::ostream& err) {
  AttackConfig attack;
  attack.algo = config.algo;
  attack.budget = config.budget;
  attack.linf = config.linf;
  attack.early_stop = config.early_stop;
  attack.kernel_sigma = config.kernel_sigma;
  DetectorFactory factory;
  try {
    validate(attack);
    factory = parse_detector_spec(config.detector);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  // Unreadable files are kept as placeholders so rows stay in file order.
  std::vector<Image> images;
  std::vector<std::string> ids;
  std::vector<std::pair<std::string, std::string>> unreadable;  // id, reason
  const std::string synthetic = "synthetic:";
  if (config.images.rfind(synthetic, 0) == 0) {
    std::size_t count = 0;
    try {
      count = static_cast<std::size_t>(parse_u64(config.images.substr(synthetic.size()), "synthetic image count"));
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n";
      return kUsage;
    }
    images = generate_synthetic_fakes(count, config.seed);
    for (std::size_t i = 0; i < count; ++i) {
      char id[32];
      std::snprintf(id, sizeof id, "synthetic-%04zu", i);
      ids.emplace_back(id);
    }
  } else {
    std::error_code ec;
    if (!fs::is_directory(config.images, ec)) {
      err << "error: image directory '" << config.images << "' not found\n";
      return kUsage;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(config.images))
      if (entry.path().extension() == ".ppm") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      err << "error: no .ppm files in '" << config.images << "'\n";
      return kUsage;
    }
    for (const auto& f : files) {
      const std::string id = sanitize_id(f.stem().string());
      try {
        images.push_back(read_ppm(f));
        ids.push_back(id);
      } catch (const std::exception& e) {
        err << "warning: skipping " << f.string() << ": " << e.what() << "\n";
        unreadable.emplace_back(id, e.what());
      }
    }
  }

  AttackSummary summary = attack_dataset(images, ids, factory, attack, config.seed, config.parallelism);

  if (!unreadable.empty()) {
    // Merge placeholders back in sorted filename order.
    std::vector<ImageOutcome> merged;
    std::size_t r = 0, u = 0;
    while (r < summary.outcomes.size() || u < unreadable.size()) {
      const bool take_bad = r == summary.outcomes.size() ||
                            (u < unreadable.size() && unreadable[u].first < summary.outcomes[r].image_id);
      if (take_bad) {
        ImageOutcome o;
        o.image_id = unreadable[u].first;
        o.clean_score = std::numeric_limits<double>::quiet_NaN();
        o.clean_errored = true;
        o.skip_reason = unreadable[u].second;
        merged.push_back(std::move(o));
        ++u;
        ++summary.skipped;
      } else {
        merged.push_back(std::move(summary.outcomes[r++]));
      }
    }
    summary.outcomes = std::move(merged);
  }

  const fs::path out_dir(config.out_dir);
  {
    auto csv = open_output(out_dir / "attack.csv");
    write_comment_header(csv, output_header(config));
    write_attack_csv(csv, summary, attack, config.seed);
  }
  if (config.save_images) fs::create_directories(out_dir / "images");
  if (config.save_images)
    for (const auto& o : summary.outcomes)
      if (o.result && !o.result->errored) write_ppm(out_dir / "images" / (o.image_id + ".ppm"), o.result->attacked);

  std::size_t unscored = 0;
  for (const auto& o : summary.outcomes)
    if (o.clean_errored) {
      ++unscored;
      if (std::find_if(unreadable.begin(), unreadable.end(),
                       [&](const auto& u) { return u.first == o.image_id; }) == unreadable.end())
        err << "warning: could not score " << o.image_id << ": " << o.skip_reason << "\n";
    }
  for (const auto& o : summary.outcomes)
    if (o.result && o.result->errored) err << "warning: attack on " << o.image_id << " errored: " << o.result->error << "\n";

  out << "images " << summary.outcomes.size() << ", attacked " << summary.attacked << ", skipped "
      << summary.skipped << ", successes " << summary.successes << ", errored " << summary.errored
      << ", success rate "
      << (summary.success_rate ? format_double(*summary.success_rate) : std::string("undefined")) << "\n";

  // Unreadable files only fail the run when nothing was left to score.
  if (!summary.outcomes.empty() && unscored == summary.outcomes.size()) return kPartial;
  return summary.errored || unscored > unreadable.size() ? kPartial : kOk;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig config;
  std::string budgets = "default";
  std::string algos;
  std::string seed_text = "0";
  std::optional<double> kernel_sigma;
  bool no_early_stop = false;
  std::size_t parallelism = std::max(1u, std::thread::hardware_concurrency());

  CLI::App app{"Black-box optimization benchmarks and attacks"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", config.out_dir, "Output directory")->required();
    sub->add_option("--seed", seed_text, "Global seed (BBO_SEED overrides)");
    sub->add_option("--parallelism", parallelism, "Worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* bench = app.add_subcommand("bench", "Benchmark grids");
  bench->require_subcommand(1);
  CLI::App* bench_run = bench->add_subcommand("run", "Run a suite and write a report");
  bench_run->add_option("--suite", config.suite, "Suite id: discrete, deceptive or sphere")->required();
  bench_run->add_option("--algos", algos, "Comma-separated algorithm ids")->required();
  bench_run->add_option("--budgets", budgets, "'default' or comma-separated budgets");
  bench_run->add_option("--seeds", config.seeds, "Repetitions per cell")->check(CLI::PositiveNumber);
  bench_run->add_flag("--traces", config.traces, "Write per-run best-so-far traces");
  common(bench_run);

  CLI::App* rank = app.add_subcommand("rank", "Score a results CSV");
  rank->add_option("--results", config.results, "results.csv from bench run")->required();
  common(rank);

  CLI::App* attack = app.add_subcommand("attack", "Evasion attacks on a detector");
  attack->require_subcommand(1);
  CLI::App* attack_run = attack->add_subcommand("run", "Attack a set of images");
  attack_run->add_option("--detector", config.detector, "builtin:<seed> or subprocess:<command>")->required();
  attack_run->add_option("--images", config.images, "Directory of .ppm files or synthetic:<count>")->required();
  attack_run->add_option("--algo", config.algo, "Algorithm id or alias");
  attack_run->add_option("--budget", config.budget, "Queries per image");
  attack_run->add_option("--linf", config.linf, "L-infinity bound");
  attack_run->add_option("--kernel-sigma", kernel_sigma, "Blur width for SM/GSM (default width/8)");
  attack_run->add_flag("--no-early-stop", no_early_stop, "Spend the whole budget even after success");
  attack_run->add_flag("--save-images", config.save_images, "Write attacked images as PPM");
  common(attack_run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (const char* env = std::getenv("BBO_SEED"); env && *env) seed_text = env;
    config.seed = parse_u64(seed_text, "seed");
    config.parallelism = parallelism;
    if (*bench) {
      config.command = "bench";
      config.algos = split(algos, ',');
      config.budgets = parse_budgets(budgets);
      return cmd_bench(config, out, err);
    }
    if (*rank) {
      config.command = "rank";
      return cmd_rank(config, out, err);
    }
    config.command = "attack";
    config.kernel_sigma = kernel_sigma;
    config.early_stop = !no_early_stop;
    return cmd_attack(config, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPartial;
  }
}

}  // namespace bbo::cli
