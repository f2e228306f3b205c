#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorot/check_report.hpp"
#include "lorot/spacetime.hpp"
#include "lorot/transport.hpp"

namespace lorot {

/// Malformed or out-of-range configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchema = 1;

/// Worker count: LOROT_THREADS when set to a positive integer, else
/// hardware concurrency (at least 1).
[[nodiscard]] unsigned worker_threads();

/// Writes to a sibling temporary file, then renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Measure kinds:
///   {"type": "cells_box", "box": [[lo, hi], ...]}   uniform on the cells whose centers lie in the box
///   {"type": "dirac", "at": [...]}
///   {"type": "atoms", "atoms": [{"at": [...], "w": ...}, ...]}
///   {"type": "random_atoms", "count": k, "box": [[lo, hi], ...]}
[[nodiscard]] DiscreteMeasure measure_from_json(const nlohmann::json& j, const SampledSpace& space,
                                                std::mt19937_64& rng);

struct ExperimentResult {
  std::vector<CheckReport> reports;
  nlohmann::json summary;                  ///< what gets written as the report JSON
  std::vector<std::filesystem::path> files;  ///< written outputs
  bool pass = true;
};

/// Runs every check of a schema-1 config:
///   {"schema": 1, "seed": 0, "space": {...}, "measures": {name: {...}},
///    "checks": [{"type": ..., ...}], "output": {"dir": ..., "name": ...}}
/// Throws ConfigError on schema or parameter problems. Checks that raise a
/// DualizabilityError or domain_error become failing reports.
[[nodiscard]] ExperimentResult run_experiment(const nlohmann::json& config);

/// Parses the file (syntax errors carry line and column) and runs it.
/// `output_dir`, when nonempty, overrides config["output"]["dir"].
[[nodiscard]] ExperimentResult run_experiment_file(const std::filesystem::path& path,
                                                   const std::filesystem::path& output_dir = {});

/// Writes `<dir>/<name>.json` and `<dir>/<name>.csv`; returns the paths.
std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result, const std::filesystem::path& dir,
                                                 const std::string& name);

/// `check,label,t,Nprime,lhs,rhs,margin` rows for all reports.
[[nodiscard]] std::string reports_csv(const std::vector<CheckReport>& reports);

}  // namespace lorot
