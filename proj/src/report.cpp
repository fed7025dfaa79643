#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "bbo/harness.hpp"

namespace bbo {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_comment_header(std::ostream& out, const std::string& header, std::string_view prefix) {
  std::istringstream lines(header);
  std::string line;
  while (std::getline(lines, line)) out << prefix << line << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "algo,problem,budget,seed,final_loss\n";
  for (const auto& r : records)
    out << r.algo << ',' << r.problem << ',' << r.budget << ',' << r.seed << ',' << format_double(r.final_loss)
        << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

template <class T>
T parse_number(const std::string& text, std::size_t line, const char* column) {
  T value{};
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc() || res.ptr != end)
    throw CsvError(line, std::string("bad ") + column + " value '" + text + "'");
  return value;
}

}  // namespace

std::vector<RunRecord> read_results_csv(std::istream& in) {
  std::vector<RunRecord> records;
  std::string line;
  std::size_t number = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != "algo,problem,budget,seed,final_loss")
        throw CsvError(number, "expected header 'algo,problem,budget,seed,final_loss'");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw CsvError(number, "expected 5 fields, got " + std::to_string(fields.size()));
    if (fields[0].empty() || fields[1].empty()) throw CsvError(number, "empty algo or problem");
    RunRecord r;
    r.algo = fields[0];
    r.problem = fields[1];
    r.budget = parse_number<std::size_t>(fields[2], number, "budget");
    r.seed = parse_number<std::uint64_t>(fields[3], number, "seed");
    r.final_loss = parse_number<double>(fields[4], number, "final_loss");
    records.push_back(std::move(r));
  }
  if (!header_seen) throw CsvError(number, "missing header");
  if (records.empty()) throw CsvError(number, "no result rows");
  return records;
}

void write_scores_csv(std::ostream& out, const ScoreTable& scores) {
  out << "algo,score,rank\n";
  std::vector<std::size_t> order(scores.algos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[scores.rank[i]] = i;
  for (std::size_t i : order) out << scores.algos[i] << ',' << format_double(scores.score[i]) << ',' << scores.rank[i] << '\n';
}

void write_stability_csv(std::ostream& out, const std::string& algo_a, const std::string& algo_b,
                         const std::vector<StabilityEntry>& entries, bool with_header) {
  if (with_header) out << "algo_a,algo_b,problem,budgets,k,bound\n";
  for (const auto& e : entries)
    out << algo_a << ',' << algo_b << ',' << e.problem << ',' << e.budgets_compared << ',' << e.k << ','
        << format_double(e.bound) << '\n';
}

namespace {

void put_le64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

std::uint64_t get_le64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("truncated trace file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_trace(std::ostream& out, const std::vector<double>& trace) {
  put_le64(out, trace.size());
  for (double v : trace) put_le64(out, std::bit_cast<std::uint64_t>(v));
}

std::vector<double> read_trace(std::istream& in) {
  const std::uint64_t count = get_le64(in);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) trace.push_back(std::bit_cast<double>(get_le64(in)));
  return trace;
}

namespace {

std::string two_decimals(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Comments may not contain "--".
std::string comment_safe(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (c == '-' && !out.empty() && out.back() == '-') out += ' ';
    out += c;
  }
  if (!out.empty() && out.back() == '-') out += ' ';
  return out;
}

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string series_label(const std::string& name, const std::vector<double>& means_by_budget) {
  std::string label = name + " (" + two_decimals(means_by_budget.empty() ? std::nan("") : means_by_budget.back()) + ")";
  if (means_by_budget.size() >= 2) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < means_by_budget.size(); ++i)
      if (!std::isnan(means_by_budget[i])) {
        total += means_by_budget[i];
        ++count;
      }
    label += " [" + two_decimals(count ? total / static_cast<double>(count) : std::nan("")) + "]";
  }
  return label;
}

std::string render_svg_chart(const std::string& title, const std::string& header,
                             const std::vector<std::size_t>& budgets,
                             const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
                                  "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  constexpr double width = 900, height = 500, left = 70, right = 300, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  double y_min = std::numeric_limits<double>::infinity(), y_max = -y_min;
  for (const auto& [name, values] : series)
    for (double v : values)
      if (std::isfinite(v)) {
        y_min = std::min(y_min, v);
        y_max = std::max(y_max, v);
      }
  if (!std::isfinite(y_min)) y_min = 0.0, y_max = 1.0;
  if (y_max == y_min) y_max = y_min + 1.0;

  const double x_lo = std::log(static_cast<double>(budgets.empty() ? 1 : budgets.front()));
  double x_hi = std::log(static_cast<double>(budgets.empty() ? 1 : budgets.back()));
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  auto px = [&](std::size_t b) { return left + (std::log(static_cast<double>(b)) - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double v) { return top + (1.0 - (v - y_min) / (y_max - y_min)) * plot_h; };

  std::ostringstream svg;
  std::istringstream lines(header);
  std::string line;
  while (std::getline(lines, line)) svg << "<!-- " << comment_safe(line) << " -->\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" << xml_escape(title)
      << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
      << top + plot_h << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  for (std::size_t b : budgets) {
    svg << "<text x=\"" << coord(px(b)) << "\" y=\"" << top + plot_h + 16
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << b << "</text>\n";
  }
  for (int tick = 0; tick <= 4; ++tick) {
    const double v = y_min + (y_max - y_min) * tick / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << coord(py(v) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << xml_escape(format_double(v))
        << "</text>\n";
  }
  svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">budget (log scale)</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& [name, values] = series[s];
    const char* color = palette[s % (sizeof palette / sizeof palette[0])];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < budgets.size() && i < values.size(); ++i) {
      if (!std::isfinite(values[i])) continue;
      svg << (first ? "" : " ") << coord(px(budgets[i])) << ',' << coord(py(values[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = top + 14.0 * static_cast<double>(s) + 10;
    svg << "<text x=\"" << left + plot_w + 12 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << xml_escape(series_label(name, values)) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::pair<std::vector<std::size_t>, std::vector<std::pair<std::string, std::vector<double>>>>
normalized_curves(const MeanLossTable& table) {
  std::set<std::size_t> budget_set;
  std::set<CellKey> cells;
  for (const auto& [algo, row] : table)
    for (const auto& [key, loss] : row) {
      budget_set.insert(key.second);
      cells.insert(key);
    }
  std::vector<std::size_t> budgets(budget_set.begin(), budget_set.end());
  std::map<std::string, std::vector<std::pair<double, std::size_t>>> acc;
  for (const auto& [algo, row] : table) acc[algo].assign(budgets.size(), {0.0, 0});

  for (const auto& key : cells) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& [algo, row] : table)
      if (auto it = row.find(key); it != row.end()) {
        lo = std::min(lo, it->second);
        hi = std::max(hi, it->second);
      }
    const auto b = static_cast<std::size_t>(std::lower_bound(budgets.begin(), budgets.end(), key.second) -
                                            budgets.begin());
    for (const auto& [algo, row] : table)
      if (auto it = row.find(key); it != row.end()) {
        const double normalized = hi > lo ? (it->second - lo) / (hi - lo) : 0.0;
        acc[algo][b].first += normalized;
        ++acc[algo][b].second;
      }
  }
  std::vector<std::pair<std::string, std::vector<double>>> curves;
  for (const auto& [algo, sums] : acc) {
    std::vector<double> curve;
    for (const auto& [total, count] : sums)
      curve.push_back(count ? total / static_cast<double>(count) : std::nan(""));
    curves.emplace_back(algo, std::move(curve));
  }
  return {budgets, curves};
}

namespace {

std::string file_stem(const std::string& id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

ReportFiles emit_report(const std::vector<RunRecord>& records, const ScoreTable& scores,
                        const std::filesystem::path& out_dir, const std::string& header) {
  namespace fs = std::filesystem;
  ReportFiles files;
  fs::create_directories(out_dir / "charts");

  files.results_csv = out_dir / "results.csv";
  {
    auto out = open_output(files.results_csv);
    write_comment_header(out, header);
    write_results_csv(out, records);
    if (!out) throw std::runtime_error("failed writing " + files.results_csv.string());
  }
  files.scores_csv = out_dir / "scores.csv";
  {
    auto out = open_output(files.scores_csv);
    write_comment_header(out, header);
    write_scores_csv(out, scores);
    if (!out) throw std::runtime_error("failed writing " + files.scores_csv.string());
  }

  const MeanLossTable table = mean_losses(records);
  std::map<std::string, std::set<std::size_t>> problem_budgets;
  for (const auto& [algo, row] : table)
    for (const auto& [key, loss] : row) problem_budgets[key.first].insert(key.second);
  for (const auto& [problem, budget_set] : problem_budgets) {
    std::vector<std::size_t> budgets(budget_set.begin(), budget_set.end());
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& [algo, row] : table) {
      std::vector<double> means;
      for (std::size_t b : budgets) {
        auto it = row.find({problem, b});
        means.push_back(it == row.end() ? std::nan("") : it->second);
      }
      series.emplace_back(algo, std::move(means));
    }
    const fs::path path = out_dir / "charts" / (file_stem(problem) + ".svg");
    open_output(path) << render_svg_chart(problem + ": mean loss", header, budgets, series);
    files.charts.push_back(path);
  }
  if (!table.empty()) {
    const auto [budgets, curves] = normalized_curves(table);
    const fs::path path = out_dir / "charts" / "normalized.svg";
    open_output(path) << render_svg_chart("mean loss normalized per problem and budget", header, budgets, curves);
    files.charts.push_back(path);
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].trace.empty()) continue;
    if (files.traces.empty()) fs::create_directories(out_dir / "traces");
    const fs::path path = out_dir / "traces" / (std::to_string(i) + ".bin");
    auto out = open_output(path, std::ios::out | std::ios::binary);
    write_trace(out, records[i].trace);
    files.traces.push_back(path);
  }
  return files;
}

}  // namespace bbo
