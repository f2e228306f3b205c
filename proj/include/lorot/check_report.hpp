#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorot/ext_real.hpp"

namespace lorot {

/// One evaluated inequality inside a check.
///
/// `margin` is the signed slack of the inequality: positive means the
/// inequality holds. For statements of the form `lhs <= rhs` it is
/// `rhs - lhs`; for `lhs >= rhs` it is `lhs - rhs`.
struct CheckEntry {
  std::string label;
  double t = 0.0;
  double nprime = 0.0;
  ExtReal lhs;
  ExtReal rhs;
  ExtReal margin;
  bool coefficient_blowup = false;
  std::optional<double> violation;  ///< mass-weighted pointwise violation (pathwise checks)
};

/// Structured record of one inequality verification.
struct CheckReport {
  std::string name;
  nlohmann::json spec = nlohmann::json::object();
  std::vector<CheckEntry> entries;
  ExtReal worst_margin = ExtReal::pos_infinity();
  double tolerance = 0.0;
  bool pass = true;
  nlohmann::json discretization = nlohmann::json::object();
  std::vector<std::string> notes;

  /// Appends an entry and folds it into worst_margin / pass. An entry fails
  /// when its margin is below -tolerance or its violation exceeds tolerance.
  void add(CheckEntry entry);

  /// Recomputes worst_margin and pass from the entries.
  void finalize();
};

/// Extended reals as JSON: numbers, or the strings "inf" / "-inf".
[[nodiscard]] nlohmann::json to_json(ExtReal x);
[[nodiscard]] ExtReal ext_real_from_json(const nlohmann::json& j);

/// Report schema: {"name", "spec", "entries": [{t, Nprime, lhs, rhs, margin, ...}],
/// "worst_margin", "tolerance", "pass", "discretization": {"h", "eps", ...}, "notes"}.
[[nodiscard]] nlohmann::json to_json(const CheckReport& report);

/// CSV rows `check,label,t,Nprime,lhs,rhs,margin` (header included when requested).
[[nodiscard]] std::string to_csv(const CheckReport& report, bool header = true);

}  // namespace lorot
