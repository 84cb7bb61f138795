#include "streamlab/bench/report_io.h"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "streamlab/common/types.h"

namespace streamlab::bench {

ReportRow ReadReport(const std::string& dir) {
  std::filesystem::path p = std::filesystem::path(dir) / "summary.json";
  std::ifstream in(p);
  if (!in) throw ConfigError(dir + ": no summary.json");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ConfigError(p.string() + ": not valid JSON");
  try {
    ReportRow r;
    r.dir = dir;
    r.ckpt_success_pct = j.at("checkpoint").at("success_pct").get<double>();
    r.qps_mean = j.at("qps").at("mean").get<double>();
    r.qps_min = j.at("qps").at("min").get<double>();
    r.max_recovery_s = j.at("recovery").at("max_recovery_time_s").get<double>();
    r.mean_recovery_s = j.at("recovery").at("mean_recovery_time_s").get<double>();
    r.dropped = j.at("records").at("dropped").get<std::int64_t>();
    r.duplicates = j.at("records").at("duplicates").get<std::int64_t>();
    r.completed = j.at("completed").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string() + ": " + e.what());
  }
}

namespace {

// One row per metric, one column per run directory.
std::vector<std::vector<std::string>> Transposed(const std::vector<ReportRow>& rows) {
  auto f = [](double v, int prec) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(prec) << v;
    return s.str();
  };
  std::vector<std::vector<std::string>> t{{"metric"}, {"ckpt_success_pct"}, {"qps_mean"}, {"qps_min"},
                                          {"max_recovery_s"}, {"mean_recovery_s"}, {"dropped"},
                                          {"duplicates"}, {"completed"}};
  for (const auto& r : rows) {
    t[0].push_back(r.dir);
    t[1].push_back(f(r.ckpt_success_pct, 1));
    t[2].push_back(f(r.qps_mean, 1));
    t[3].push_back(f(r.qps_min, 0));
    t[4].push_back(f(r.max_recovery_s, 3));
    t[5].push_back(f(r.mean_recovery_s, 3));
    t[6].push_back(std::to_string(r.dropped));
    t[7].push_back(std::to_string(r.duplicates));
    t[8].push_back(r.completed ? "yes" : "no");
  }
  return t;
}

}  // namespace

std::string ReportTable(const std::vector<ReportRow>& rows) {
  auto t = Transposed(rows);
  std::vector<std::size_t> w(t[0].size(), 0);
  for (const auto& line : t) {
    for (std::size_t c = 0; c < line.size(); ++c) w[c] = std::max(w[c], line[c].size());
  }
  std::ostringstream s;
  for (const auto& line : t) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c == 0) {
        s << std::left << std::setw(static_cast<int>(w[c])) << line[c];
      } else {
        s << " | " << std::right << std::setw(static_cast<int>(w[c])) << line[c];
      }
    }
    s << "\n";
  }
  return s.str();
}

std::string ReportCsv(const std::vector<ReportRow>& rows) {
  std::string out;
  for (const auto& line : Transposed(rows)) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      std::string cell = line[c];
      if (cell.find_first_of(",\"") != std::string::npos) {
        std::string q = "\"";
        for (char ch : cell) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        cell = q + "\"";
      }
      out += (c ? "," : "") + cell;
    }
    out += "\n";
  }
  return out;
}

int CompareReports(const std::vector<std::string>& dirs, bool csv, std::ostream& out, std::ostream& err) {
  if (dirs.empty()) {
    err << "report: no run directories given\n";
    return 2;
  }
  std::vector<ReportRow> rows;
  bool bad = false;
  for (const auto& d : dirs) {
    try {
      rows.push_back(ReadReport(d));
    } catch (const ConfigError& e) {
      err << "warning: skipping " << e.what() << "\n";
      bad = true;
    }
  }
  out << (csv ? ReportCsv(rows) : ReportTable(rows));
  return bad ? 1 : 0;
}

}  // namespace streamlab::bench
