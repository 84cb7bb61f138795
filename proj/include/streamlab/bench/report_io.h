#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace streamlab::bench {

struct ReportRow {
  std::string dir;
  double ckpt_success_pct = 0;
  double qps_mean = 0;
  double qps_min = 0;
  double max_recovery_s = 0;
  double mean_recovery_s = 0;
  std::int64_t dropped = 0;
  std::int64_t duplicates = 0;
  bool completed = false;
};

// Reads <dir>/summary.json. Throws ConfigError when missing or malformed.
ReportRow ReadReport(const std::string& dir);

std::string ReportTable(const std::vector<ReportRow>& rows);
std::string ReportCsv(const std::vector<ReportRow>& rows);

// Prints the comparison of all readable dirs. Returns 2 with no dirs, 1 if
// any dir was unreadable (reported on err), else 0.
int CompareReports(const std::vector<std::string>& dirs, bool csv, std::ostream& out, std::ostream& err);

}  // namespace streamlab::bench
