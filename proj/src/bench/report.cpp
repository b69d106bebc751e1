#include "igb/bench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "igb/bench/train.hpp"
#include "igb/errors.hpp"

namespace igb::bench {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

bool is_stl(const std::string& label) { return label.rfind("STL-task", 0) == 0; }

std::size_t stl_task(const std::string& label) { return std::stoul(label.substr(8)) - 1; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

const MethodRow* MetricReport::find(const std::string& label) const {
  for (const auto& r : rows) {
    if (r.label == label) return &r;
  }
  return nullptr;
}

MetricReport summarize(const std::vector<RunRecord>& records, const std::vector<std::string>& order) {
  MetricReport rep;
  std::size_t n = 0;
  // Single-task references and EW times, per seed.
  std::map<std::uint64_t, std::vector<std::optional<double>>> stl_test;
  std::map<std::uint64_t, double> stl_seconds;
  std::map<std::uint64_t, double> ew_seconds;
  std::map<std::string, std::vector<const RunRecord*>> by_method;
  std::vector<std::string> labels;

  for (const auto& r : records) {
    if (r.aborted) continue;
    if (is_stl(r.method)) continue;
    if (n == 0) {
      n = r.tasks;
      rep.higher_is_better = r.higher_is_better;
    } else if (r.tasks != n) {
      throw ContractError("report: records disagree on the task count");
    }
    if (!by_method.count(r.method)) labels.push_back(r.method);
    by_method[r.method].push_back(&r);
    if (r.method == "EW") ew_seconds[r.seed] = r.train_seconds;
  }
  for (const auto& r : records) {
    if (r.aborted || !is_stl(r.method)) continue;
    const std::size_t k = stl_task(r.method);
    auto& v = stl_test[r.seed];
    if (v.size() <= k) v.resize(std::max(k + 1, n));
    v[k] = r.test_metrics.at(0);
    stl_seconds[r.seed] += r.train_seconds;
    if (n == 0) rep.higher_is_better.resize(k + 1);
  }

  for (std::size_t i = 0; i < n; ++i) {
    rep.metric_names.push_back("task" + std::to_string(i + 1) + (rep.higher_is_better[i] ? " Acc" : " MSE"));
  }

  auto stl_for = [&](std::uint64_t seed) -> std::optional<std::vector<double>> {
    auto it = stl_test.find(seed);
    if (it == stl_test.end() || it->second.size() != n) return std::nullopt;
    std::vector<double> out;
    for (const auto& v : it->second) {
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  };

  // STL row: the single-task metrics, delta_m 0 by construction.
  std::vector<std::vector<double>> stl_rows;
  for (const auto& [seed, _] : stl_test) {
    if (auto v = stl_for(seed)) stl_rows.push_back(*v);
  }
  if (!stl_rows.empty()) {
    MethodRow row;
    row.label = "STL";
    row.seeds = stl_rows.size();
    row.metric_mean.assign(n, 0.0);
    for (const auto& v : stl_rows) {
      for (std::size_t i = 0; i < n; ++i) row.metric_mean[i] += v[i] / static_cast<double>(stl_rows.size());
      row.delta_m.push_back(compute_delta_m(v, v, rep.higher_is_better));
    }
    row.delta_m_summary = mean_std(row.delta_m);
    rep.rows.push_back(std::move(row));
  }

  std::vector<std::string> ordered;
  for (const auto& l : order) {
    if (by_method.count(l)) ordered.push_back(l);
  }
  if (order.empty() && by_method.count("EW")) ordered.push_back("EW");
  for (const auto& l : labels) {
    if (std::find(ordered.begin(), ordered.end(), l) == ordered.end()) ordered.push_back(l);
  }

  for (const auto& label : ordered) {
    MethodRow row;
    row.label = label;
    row.metric_mean.assign(n, 0.0);
    const auto& runs = by_method[label];
    row.seeds = runs.size();
    bool all_dm = true, all_t = true;
    for (const RunRecord* r : runs) {
      for (std::size_t i = 0; i < n; ++i) row.metric_mean[i] += r->test_metrics.at(i) / static_cast<double>(runs.size());
      if (auto ref = stl_for(r->seed)) {
        row.delta_m.push_back(compute_delta_m(r->test_metrics, *ref, rep.higher_is_better, rep.metric_names));
      } else {
        all_dm = false;
      }
      auto ew = ew_seconds.find(r->seed);
      if (ew != ew_seconds.end()) {
        row.T.push_back(compute_T(r->train_seconds, ew->second));
      } else {
        all_t = false;
      }
    }
    if (all_dm && !row.delta_m.empty()) row.delta_m_summary = mean_std(row.delta_m);
    if (all_t && !row.T.empty()) row.T_summary = mean_std(row.T);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

std::string format_table(const MetricReport& rep) {
  std::ostringstream out;
  out << "| Method |";
  for (std::size_t i = 0; i < rep.metric_names.size(); ++i) {
    out << " " << rep.metric_names[i] << (rep.higher_is_better[i] ? " ↑" : "") << " |";
  }
  out << " Δm% ↓ | T ↓ |\n";
  out << "|---|";
  for (std::size_t i = 0; i < rep.metric_names.size(); ++i) out << "---|";
  out << "---|---|\n";
  for (const auto& row : rep.rows) {
    out << "| " << row.label << " |";
    for (double m : row.metric_mean) out << " " << fixed(m, 4) << " |";
    if (row.delta_m_summary) {
      out << " " << fixed(row.delta_m_summary->mean, 2) << " ± " << fixed(row.delta_m_summary->stddev, 2) << " |";
    } else {
      out << " - |";
    }
    if (row.T_summary) {
      out << " " << fixed(row.T_summary->mean, 2) << " |";
    } else {
      out << " - |";
    }
    out << "\n";
  }
  return out.str();
}

std::string report_json(const MetricReport& rep) {
  using nlohmann::json;
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r{{"method", row.label}, {"seeds", row.seeds}, {"test_metrics", row.metric_mean},
           {"delta_m", row.delta_m}, {"T", row.T}};
    if (row.delta_m_summary) r["delta_m_mean"] = row.delta_m_summary->mean, r["delta_m_std"] = row.delta_m_summary->stddev;
    if (row.T_summary) r["T_mean"] = row.T_summary->mean, r["T_std"] = row.T_summary->stddev;
    rows.push_back(r);
  }
  json root{{"metrics", rep.metric_names}, {"higher_is_better", rep.higher_is_better}, {"methods", rows}};
  return root.dump(2);
}

std::string loss_curve_svg(const std::vector<RunRecord>& runs, const std::string& title) {
  const double W = 640, H = 400, L = 60, R = 20, T = 30, B = 40;
  std::size_t n = 0, epochs = 0;
  for (const auto& r : runs) {
    n = std::max(n, r.tasks);
    epochs = std::max(epochs, r.epochs.size());
  }
  // Seed-averaged log10 of the mean training loss.
  std::vector<std::vector<double>> curve(n, std::vector<double>(epochs, 0.0));
  std::vector<std::size_t> count(epochs, 0);
  for (const auto& r : runs) {
    for (std::size_t e = 0; e < r.epochs.size(); ++e) {
      ++count[e];
      for (std::size_t i = 0; i < n && i < r.epochs[e].train_losses.size(); ++i) {
        curve[i][e] += std::log10(std::max(r.epochs[e].train_losses[i], 1e-12));
      }
    }
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (auto& c : curve) {
    for (std::size_t e = 0; e < epochs; ++e) {
      if (count[e] == 0) continue;
      c[e] /= static_cast<double>(count[e]);
      lo = std::min(lo, c[e]);
      hi = std::max(hi, c[e]);
    }
  }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 1 : 0;
    hi = lo + 2;
  }
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto x_of = [&](std::size_t e) { return L + (W - L - R) * (epochs > 1 ? double(e) / double(epochs - 1) : 0.0); };
  auto y_of = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"" << H - 8 << "\" text-anchor=\"middle\" font-size=\"12\">epoch</text>\n";
  out << "<text x=\"14\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 14 " << H / 2
      << ")\" text-anchor=\"middle\">log10 train loss</text>\n";
  out << "<text x=\"" << L - 4 << "\" y=\"" << y_of(hi) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(hi, 1) << "</text>\n";
  out << "<text x=\"" << L - 4 << "\" y=\"" << y_of(lo) + 4 << "\" text-anchor=\"end\" font-size=\"10\">" << fixed(lo, 1) << "</text>\n";
  for (std::size_t i = 0; i < n; ++i) {
    out << "<polyline fill=\"none\" stroke=\"" << colors[i % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t e = 0; e < epochs; ++e) {
      if (count[e]) out << fixed(x_of(e), 1) << "," << fixed(y_of(curve[i][e]), 1) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << W - R - 60 << "\" y=\"" << T + 14 * (i + 1) << "\" font-size=\"11\" fill=\"" << colors[i % 6]
        << "\">task" << i + 1 << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::vector<RunRecord> load_records(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error("report: " + dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunRecord> out;
  for (const auto& f : files) out.push_back(load_record(f));
  return out;
}

MetricReport write_report(const std::filesystem::path& dir, const std::vector<RunRecord>& records,
                          const std::vector<std::string>& order) {
  auto rep = summarize(records, order);
  std::filesystem::create_directories(dir / "plots");
  write_file(dir / "table.md", format_table(rep));
  write_file(dir / "summary.json", report_json(rep));
  std::map<std::string, std::vector<RunRecord>> by_method;
  for (const auto& r : records) {
    if (!r.aborted && !is_stl(r.method)) by_method[r.method].push_back(r);
  }
  for (const auto& [label, runs] : by_method) {
    std::string safe = record_file_name(label, 0);
    safe = safe.substr(0, safe.size() - std::string("_seed0.csv").size());
    write_file(dir / "plots" / (safe + ".svg"), loss_curve_svg(runs, label + " training loss"));
  }
  return rep;
}

}  // namespace igb::bench
