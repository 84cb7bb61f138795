#include "streamlab/bench/runner.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "streamlab/chaos/fault_plan.h"

namespace streamlab::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void WriteText(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
  if (!out) throw EngineError("cannot write " + p.string());
}

std::string ValueText(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::unique_ptr<runtime::JobRuntime> Prepare(const RunConfig& cfg, std::vector<std::string>* warnings) {
  auto rt = std::make_unique<runtime::JobRuntime>(cfg.graph, cfg.engine);
  rt->Start();
  chaos::Arm(cfg.faults, *rt, warnings);
  return rt;
}

CollectOptions DefaultCollect(const RunConfig& cfg) {
  CollectOptions opts;
  opts.window_end = cfg.workload.duration;
  return opts;
}

MetricsReport Run(const RunConfig& cfg) {
  std::vector<std::string> warnings;
  std::unique_ptr<runtime::JobRuntime> rt;
  try {
    rt = Prepare(cfg, &warnings);
  } catch (const std::exception& e) {
    MetricsReport r;
    r.valid = false;
    r.error = e.what();
    return r;
  }
  const CollectOptions opts = DefaultCollect(cfg);
  try {
    bool done = rt->RunToCompletion(cfg.max_time);
    MetricsReport r = Collect(*rt, done, opts);
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    return r;
  } catch (const std::exception& e) {
    MetricsReport r;
    try {
      r = Collect(*rt, false, opts);
    } catch (const std::exception&) {
    }
    r.valid = false;
    r.error = e.what();
    r.warnings.insert(r.warnings.end(), warnings.begin(), warnings.end());
    return r;
  }
}

RunOutcome RunAndWrite(const RunConfig& cfg, const std::string& dir) {
  RunOutcome out;
  out.report = Run(cfg);
  if (!dir.empty()) {
    WriteReport(out.report, dir);
    WriteText(fs::path(dir) / "resolved_config.json", cfg.doc.dump(2) + "\n");
  }
  if (!out.report.valid) {
    out.exit_code = kExitEngine;
    return out;
  }
  if (cfg.slo) {
    out.verdict = EvaluateSlo(out.report, *cfg.slo);
    if (!dir.empty()) WriteText(fs::path(dir) / "verdict.json", VerdictToJson(*out.verdict, *cfg.slo).dump(2) + "\n");
    if (!out.verdict->overall) out.exit_code = kExitViolation;
  }
  if (!out.report.completed) out.exit_code = kExitViolation;
  return out;
}

GridAxis ParseGridFlag(const std::string& text) {
  auto [path, rest] = SplitOverride(text);
  GridAxis a;
  a.path = path;
  json parsed = json::parse(rest, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_array()) {
    for (auto& v : parsed) a.values.push_back(v);
  } else {
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      json v = json::parse(item, nullptr, false);
      a.values.push_back(v.is_discarded() ? json(item) : v);
    }
  }
  if (a.values.empty()) throw ConfigError("grid axis '" + path + "' has no values");
  return a;
}

std::vector<GridAxis> GridFromJson(const json& j) {
  if (!j.is_object()) throw ConfigError("grid: expected an object of path -> [values]");
  std::vector<GridAxis> axes;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_array() || it.value().empty()) throw ConfigError("grid." + it.key() + ": expected a non-empty array");
    GridAxis a{it.key(), {}};
    for (auto& v : it.value()) a.values.push_back(v);
    axes.push_back(std::move(a));
  }
  return axes;
}

std::vector<SweepCell> ExpandGrid(const json& base, const std::vector<GridAxis>& axes) {
  std::vector<SweepCell> cells{{"", base}};
  cells.front().doc.erase("grid");
  for (const auto& axis : axes) {
    std::vector<SweepCell> next;
    for (const auto& c : cells) {
      for (const auto& v : axis.values) {
        SweepCell n = c;
        SetPathJson(n.doc, axis.path, v);
        n.label += (n.label.empty() ? "" : ",") + axis.path + "=" + ValueText(v);
        next.push_back(std::move(n));
      }
    }
    cells = std::move(next);
  }
  return cells;
}

int RunSweep(const json& base, const std::vector<GridAxis>& flag_axes, const SweepOptions& opts, std::ostream& log) {
  std::vector<GridAxis> axes;
  if (base.contains("grid")) axes = GridFromJson(base["grid"]);
  for (const auto& a : flag_axes) {
    auto it = std::find_if(axes.begin(), axes.end(), [&](const GridAxis& x) { return x.path == a.path; });
    if (it != axes.end()) {
      *it = a;
    } else {
      axes.push_back(a);
    }
  }
  auto cells = ExpandGrid(base, axes);

  struct Row {
    std::string status = "pending";
    std::string error;
    MetricsReport report;
    std::optional<SloVerdict> verdict;
  };
  std::vector<Row> rows(cells.size());
  fs::create_directories(opts.out_dir);

  std::atomic<std::size_t> next{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      std::ostringstream name;
      name << "cell_" << std::setw(3) << std::setfill('0') << i;
      fs::path dir = fs::path(opts.out_dir) / name.str();
      Row& row = rows[i];
      try {
        RunConfig cfg = ResolveConfig(cells[i].doc, opts.base_dir);
        auto out = RunAndWrite(cfg, dir.string());
        row.report = std::move(out.report);
        row.verdict = out.verdict;
        if (!row.report.valid) {
          row.status = "crashed";
          row.error = row.report.error;
        } else {
          row.status = out.exit_code == kExitOk ? "ok" : "violated";
        }
      } catch (const ConfigError& e) {
        row.status = "config_error";
        row.error = e.what();
      } catch (const std::exception& e) {
        row.status = "crashed";
        row.error = e.what();
      }
      std::lock_guard<std::mutex> lk(log_mu);
      log << name.str() << " [" << (cells[i].label.empty() ? "base" : cells[i].label) << "] " << row.status;
      if (!row.error.empty()) log << ": " << row.error;
      log << "\n";
    }
  };
  int n = std::max(1, std::min<int>(opts.parallel, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<std::string> header{"cell"};
  for (const auto& a : axes) header.push_back(a.path);
  for (const char* h : {"status", "ckpt_success_pct", "qps_mean", "qps_min", "max_recovery_s", "dropped",
                        "duplicates", "slo"}) {
    header.push_back(h);
  }
  std::vector<std::vector<std::string>> table;
  bool failed = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Row& row = rows[i];
    std::vector<std::string> line;
    std::ostringstream name;
    name << "cell_" << std::setw(3) << std::setfill('0') << i;
    line.push_back(name.str());
    for (const auto& a : axes) {
      const json* v = &cells[i].doc;
      std::size_t start = 0;
      std::string p = a.path;
      while (v && start <= p.size()) {
        auto dot = p.find('.', start);
        std::string k = p.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        v = v->is_object() && v->contains(k) ? &(*v)[k] : nullptr;
        if (dot == std::string::npos) break;
        start = dot + 1;
      }
      line.push_back(v ? ValueText(*v) : "");
    }
    line.push_back(row.status);
    bool has = row.status == "ok" || row.status == "violated";
    auto num = [&](double x, int prec) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(prec) << x;
      return has ? s.str() : std::string("-");
    };
    line.push_back(num(row.report.checkpoint_success_pct(), 2));
    line.push_back(num(row.report.qps_mean, 1));
    line.push_back(num(static_cast<double>(row.report.qps_min), 0));
    line.push_back(num(ToSeconds(row.report.max_recovery_time()), 3));
    line.push_back(num(static_cast<double>(row.report.records_dropped), 0));
    line.push_back(num(static_cast<double>(row.report.duplicates), 0));
    line.push_back(row.verdict ? (row.verdict->overall ? "pass" : "fail") : "-");
    if (row.status == "crashed" || row.status == "config_error") failed = true;
    table.push_back(std::move(line));
  }

  std::string csv;
  auto csv_line = [&](const std::vector<std::string>& cols) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      std::string f = cols[c];
      if (f.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char ch : f) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        f = q + "\"";
      }
      csv += (c ? "," : "") + f;
    }
    csv += "\n";
  };
  csv_line(header);
  for (const auto& l : table) csv_line(l);
  WriteText(fs::path(opts.out_dir) / "summary.csv", csv);

  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& l : table) width[c] = std::max(width[c], l[c].size());
  }
  std::ostringstream txt;
  auto txt_line = [&](const std::vector<std::string>& cols) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      txt << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << cols[c];
    }
    txt << "\n";
  };
  txt_line(header);
  for (const auto& l : table) txt_line(l);
  WriteText(fs::path(opts.out_dir) / "summary.txt", txt.str());
  log << txt.str();
  return failed ? 1 : 0;
}

}  // namespace streamlab::bench
