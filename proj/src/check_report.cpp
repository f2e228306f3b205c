#include "lorot/check_report.hpp"

#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lorot {

namespace {

bool entry_fails(const CheckEntry& e, double tolerance) {
  if (e.margin < ExtReal(-tolerance)) return true;
  return e.violation && *e.violation > tolerance;
}

// RFC 4180 quoting for fields containing separators or quotes.
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void CheckReport::add(CheckEntry entry) {
  worst_margin = min(worst_margin, entry.margin);
  if (entry_fails(entry, tolerance)) pass = false;
  entries.push_back(std::move(entry));
}

void CheckReport::finalize() {
  worst_margin = ExtReal::pos_infinity();
  pass = true;
  for (const auto& e : entries) {
    worst_margin = min(worst_margin, e.margin);
    if (entry_fails(e, tolerance)) pass = false;
  }
}

nlohmann::json to_json(ExtReal x) {
  if (x.is_pos_inf()) return "inf";
  if (x.is_neg_inf()) return "-inf";
  return x.value();
}

ExtReal ext_real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return ExtReal::from_double(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return ExtReal::pos_infinity();
    if (s == "-inf") return ExtReal::neg_infinity();
  }
  throw std::invalid_argument("expected a number, \"inf\" or \"-inf\"");
}

nlohmann::json to_json(const CheckReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    nlohmann::json row = {
        {"label", e.label},
        {"t", e.t},
        {"Nprime", e.nprime},
        {"lhs", to_json(e.lhs)},
        {"rhs", to_json(e.rhs)},
        {"margin", to_json(e.margin)},
    };
    if (e.coefficient_blowup) row["coefficient_blowup"] = true;
    if (e.violation) row["violation"] = *e.violation;
    entries.push_back(std::move(row));
  }
  return {
      {"name", report.name},
      {"spec", report.spec},
      {"entries", std::move(entries)},
      {"worst_margin", to_json(report.worst_margin)},
      {"tolerance", report.tolerance},
      {"pass", report.pass},
      {"discretization", report.discretization},
      {"notes", report.notes},
  };
}

std::string to_csv(const CheckReport& report, bool header) {
  std::ostringstream os;
  os << std::setprecision(17);
  if (header) os << "check,label,t,Nprime,lhs,rhs,margin\n";
  for (const auto& e : report.entries) {
    os << report.name << ',' << csv_field(e.label) << ',' << e.t << ',' << e.nprime << ',' << e.lhs << ','
       << e.rhs << ',' << e.margin << '\n';
  }
  return os.str();
}

}  // namespace lorot
