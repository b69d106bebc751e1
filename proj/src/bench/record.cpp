#include "igb/bench/record.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "igb/errors.hpp"

namespace igb::bench {

namespace {

constexpr const char* kMagic = "# igb-run-record v1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s.empty()) throw ContractError("record: empty number");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw ContractError("record: bad number '" + s + "'");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ContractError("record: bad integer '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(part));
  return out;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') {
      out += "\\\\";
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      out += s[i + 1] == 'n' ? '\n' : s[i + 1];
      ++i;
    } else {
      out += s[i];
    }
  }
  return out;
}

void put_cells(std::string& line, const std::vector<double>& v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) line += "," + (i < v.size() ? fmt(v[i]) : std::string());
}

void put_opt(std::string& line, const std::optional<double>& v) { line += "," + (v ? fmt(*v) : std::string()); }

std::vector<double> take_cells(const std::vector<std::string>& cells, std::size_t& at, std::size_t n) {
  std::vector<double> out;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) any = any || !cells[at + i].empty();
  if (any) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(parse_double(cells[at + i]));
  }
  at += n;
  return out;
}

std::optional<double> take_opt(const std::vector<std::string>& cells, std::size_t& at) {
  const std::string& c = cells[at++];
  if (c.empty()) return std::nullopt;
  return parse_double(c);
}

}  // namespace

bool same_trajectory(const RunRecord& a, const RunRecord& b) {
  RunRecord x = a, y = b;
  for (auto* r : {&x, &y}) {
    r->train_seconds = r->wall_seconds = 0.0;
    for (auto& e : r->epochs) e.train_seconds = e.wall_seconds = 0.0;
  }
  return x == y;
}

void validate_record(const RunRecord& record) {
  for (std::size_t i = 1; i < record.batches.size(); ++i) {
    const auto& p = record.batches[i - 1];
    const auto& c = record.batches[i];
    if (!(c.epoch > p.epoch || (c.epoch == p.epoch && c.batch > p.batch))) {
      throw ContractError("record: batch rows out of order at row " + std::to_string(i));
    }
  }
  for (std::size_t i = 1; i < record.epochs.size(); ++i) {
    const auto& p = record.epochs[i - 1];
    const auto& c = record.epochs[i];
    if (c.epoch <= p.epoch) throw ContractError("record: epoch rows out of order at row " + std::to_string(i));
    if (c.train_seconds < p.train_seconds || c.wall_seconds < p.wall_seconds) {
      throw ContractError("record: timestamps decrease at epoch " + std::to_string(c.epoch));
    }
  }
}

std::string write_record(const RunRecord& r) {
  const std::size_t n = r.tasks;
  std::ostringstream out;
  std::string hib;
  for (std::size_t i = 0; i < r.higher_is_better.size(); ++i) hib += (i ? "," : "") + std::string(r.higher_is_better[i] ? "1" : "0");
  out << kMagic << "\n"
      << "# method=" << escape(r.method) << "\n"
      << "# seed=" << r.seed << "\n"
      << "# tasks=" << n << "\n"
      << "# higher_is_better=" << hib << "\n"
      << "# selected_epoch=" << r.selected_epoch << "\n"
      << "# test_metrics=" << join(r.test_metrics) << "\n"
      << "# test_losses=" << join(r.test_losses) << "\n"
      << "# test_delta_m=" << (r.test_delta_m ? fmt(*r.test_delta_m) : "") << "\n"
      << "# train_seconds=" << fmt(r.train_seconds) << "\n"
      << "# wall_seconds=" << fmt(r.wall_seconds) << "\n"
      << "# backward_passes=" << r.backward_passes << "\n"
      << "# clamped_losses=" << r.clamped_losses << "\n"
      << "# aborted=" << (r.aborted ? 1 : 0) << "\n"
      << "# abort_reason=" << escape(r.abort_reason) << "\n";

  std::string header = "kind,epoch,batch";
  for (const char* col : {"loss", "weight"}) {
    for (std::size_t i = 1; i <= n; ++i) header += "," + std::string(col) + "_" + std::to_string(i);
  }
  header += ",reward";
  for (const char* col : {"val_loss", "val_metric"}) {
    for (std::size_t i = 1; i <= n; ++i) header += "," + std::string(col) + "_" + std::to_string(i);
  }
  header += ",lr,val_delta_m,train_seconds,wall_seconds";
  out << header << "\n";

  // Rows interleave so that each epoch row follows that epoch's batches.
  std::size_t e = 0;
  auto flush_epochs = [&](std::size_t upto) {
    for (; e < r.epochs.size() && r.epochs[e].epoch <= upto; ++e) {
      const EpochRow& row = r.epochs[e];
      std::string line = "epoch," + std::to_string(row.epoch) + ",";
      put_cells(line, row.train_losses, n);
      put_cells(line, {}, n);
      line += ",";
      put_cells(line, row.val_losses, n);
      put_cells(line, row.val_metrics, n);
      line += "," + fmt(row.lr);
      put_opt(line, row.val_delta_m);
      line += "," + fmt(row.train_seconds) + "," + fmt(row.wall_seconds);
      out << line << "\n";
    }
  };
  for (const BatchRow& row : r.batches) {
    if (row.epoch > 0) flush_epochs(row.epoch - 1);
    std::string line = "batch," + std::to_string(row.epoch) + "," + std::to_string(row.batch);
    put_cells(line, row.losses, n);
    put_cells(line, row.weights, n);
    put_opt(line, row.reward);
    put_cells(line, {}, 2 * n);
    line += ",,,,";
    out << line << "\n";
  }
  flush_epochs(static_cast<std::size_t>(-1));
  return out.str();
}

RunRecord parse_record(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw ContractError("record: missing '" + std::string(kMagic) + "' header");

  std::map<std::string, std::string> meta;
  std::string columns;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ContractError("record: bad header line '" + line + "'");
      meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
    } else {
      columns = line;
      break;
    }
  }
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw ContractError("record: header lacks '" + key + "'");
    return it->second;
  };

  RunRecord r;
  r.method = unescape(get("method"));
  r.seed = parse_uint(get("seed"));
  r.tasks = parse_uint(get("tasks"));
  if (!get("higher_is_better").empty()) {
    for (const auto& f : split(get("higher_is_better"), ',')) r.higher_is_better.push_back(f == "1");
  }
  r.selected_epoch = parse_uint(get("selected_epoch"));
  r.test_metrics = parse_list(get("test_metrics"));
  r.test_losses = parse_list(get("test_losses"));
  if (!get("test_delta_m").empty()) r.test_delta_m = parse_double(get("test_delta_m"));
  r.train_seconds = parse_double(get("train_seconds"));
  r.wall_seconds = parse_double(get("wall_seconds"));
  r.backward_passes = parse_uint(get("backward_passes"));
  r.clamped_losses = parse_uint(get("clamped_losses"));
  r.aborted = get("aborted") == "1";
  r.abort_reason = unescape(get("abort_reason"));

  const std::size_t n = r.tasks;
  const std::size_t width = 3 + 2 * n + 1 + 2 * n + 4;
  if (split(columns, ',').size() != width) throw ContractError("record: column header does not match task count");
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width) throw ContractError("record: row " + std::to_string(lineno) + " has wrong width");
    std::size_t at = 3;
    if (cells[0] == "batch") {
      BatchRow row;
      row.epoch = parse_uint(cells[1]);
      row.batch = parse_uint(cells[2]);
      row.losses = take_cells(cells, at, n);
      row.weights = take_cells(cells, at, n);
      row.reward = take_opt(cells, at);
      r.batches.push_back(std::move(row));
    } else if (cells[0] == "epoch") {
      EpochRow row;
      row.epoch = parse_uint(cells[1]);
      row.train_losses = take_cells(cells, at, n);
      at += n + 1;
      row.val_losses = take_cells(cells, at, n);
      row.val_metrics = take_cells(cells, at, n);
      row.lr = parse_double(cells[at++]);
      row.val_delta_m = take_opt(cells, at);
      row.train_seconds = parse_double(cells[at++]);
      row.wall_seconds = parse_double(cells[at++]);
      r.epochs.push_back(std::move(row));
    } else {
      throw ContractError("record: unknown row kind '" + cells[0] + "'");
    }
  }
  return r;
}

void save_record(const RunRecord& record, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write record file " + path.string());
  out << write_record(record);
}

RunRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open record file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_record(buf.str());
}

std::string record_file_name(const std::string& method, std::uint64_t seed) {
  std::string safe;
  for (char c : method) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '-';
  return safe + "_seed" + std::to_string(seed) + ".csv";
}

}  // namespace igb::bench
