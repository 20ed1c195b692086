#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace bergman {

/// Relative slack granted to every explicit inequality that can hold with
/// equality (constant weights, constant functions): lhs <= rhs * (1 + kRelTol).
inline constexpr double kRelTol = 1e-12;

inline bool within(double lhs, double rhs, double rel = kRelTol) { return lhs <= rhs * (1.0 + rel); }

/// One checked (or merely measured) inequality.
struct InequalityReport {
  std::string experiment;
  std::string theorem;
  double alpha = 0.0;
  int depth = 0;
  double p = std::numeric_limits<double>::quiet_NaN();
  double q = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  double t = std::numeric_limits<double>::quiet_NaN();
  std::string weight_id;
  std::string f_id;
  double lhs = 0.0;
  double rhs_explicit = 0.0;
  double ratio = 0.0;
  /// False for ratio-only rows, whose pass column is reported as "na".
  bool asserted = true;
  bool pass = true;
  std::string grid_mode;
  /// Arc or configuration attaining the reported ratio.
  std::string witness;
  std::size_t checked = 1;
  std::size_t failed = 0;
  std::string provenance;

  void set_sides(double l, double r_explicit);
};

/// Shortest representation that reads back to the same double.
std::string format_double(double value);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const InequalityReport& report);
void write_csv(std::ostream& out, const std::vector<InequalityReport>& reports);

struct ReportSummary {
  std::size_t pass_count = 0;
  std::size_t fail_count = 0;
  double max_ratio = 0.0;
};

/// Counts asserted instances; ratio-only rows only enter max_ratio.
ReportSummary summarize(const std::vector<InequalityReport>& reports);

}  // namespace bergman
