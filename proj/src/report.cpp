#include "bergman/report.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

namespace bergman {

void InequalityReport::set_sides(double l, double r_explicit) {
  lhs = l;
  rhs_explicit = r_explicit;
  ratio = l / r_explicit;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv_header(std::ostream& out) {
  out << "experiment,theorem,alpha,depth,p,q,r,t,weight_id,f_id,lhs,rhs_explicit,ratio,pass,"
         "grid_mode,witness,checked,failed,provenance\n";
}

void write_csv_row(std::ostream& out, const InequalityReport& r) {
  out << csv_field(r.experiment) << ',' << csv_field(r.theorem) << ',' << format_double(r.alpha) << ','
      << r.depth << ',' << format_double(r.p) << ',' << format_double(r.q) << ',' << format_double(r.r)
      << ',' << format_double(r.t) << ',' << csv_field(r.weight_id) << ',' << csv_field(r.f_id) << ','
      << format_double(r.lhs) << ',' << format_double(r.rhs_explicit) << ',' << format_double(r.ratio)
      << ',' << (r.asserted ? (r.pass ? "true" : "false") : "na") << ',' << csv_field(r.grid_mode) << ','
      << csv_field(r.witness) << ',' << r.checked << ',' << r.failed << ',' << csv_field(r.provenance)
      << '\n';
}

void write_csv(std::ostream& out, const std::vector<InequalityReport>& reports) {
  write_csv_header(out);
  for (const auto& r : reports) write_csv_row(out, r);
}

ReportSummary summarize(const std::vector<InequalityReport>& reports) {
  ReportSummary s;
  for (const auto& r : reports) {
    if (std::isfinite(r.ratio)) s.max_ratio = std::max(s.max_ratio, r.ratio);
    if (!r.asserted) continue;
    s.fail_count += r.failed;
    s.pass_count += r.checked - r.failed;
  }
  return s;
}

}  // namespace bergman
