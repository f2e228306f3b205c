#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorot/check_report.hpp"
#include "lorot/ext_real.hpp"
#include "lorot/network_simplex.hpp"
#include "lorot/spacetime.hpp"

namespace lorot {

/// Finitely supported probability measure.
///
/// Atoms carry explicit positions. When the measure was built from cells of
/// a SampledSpace, `cells[i]` is the cell index of atom i and `is_ac` marks
/// that the weights represent density * reference mass on those cells.
///
/// `footprint[i]` is the side of the box represented by atom i, in units of
/// the grid cell extents (1 for a full cell, 0 for a point mass). An empty
/// vector means every atom is a point mass.
struct DiscreteMeasure {
  std::vector<Event> atoms;
  std::vector<double> weights;
  bool is_ac = false;
  std::vector<std::size_t> cells;
  std::vector<double> footprint;

  [[nodiscard]] std::size_t size() const { return atoms.size(); }
  [[nodiscard]] double footprint_of(std::size_t i) const { return footprint.empty() ? 0.0 : footprint[i]; }

  /// Throws std::invalid_argument unless weights are >= 0 and sum to 1 (1e-10).
  void validate() const;

  [[nodiscard]] static DiscreteMeasure dirac(Event at);

  /// Normalized reference measure restricted to `cells` (uniform density).
  [[nodiscard]] static DiscreteMeasure uniform_on_cells(const SampledSpace& space,
                                                        std::span<const std::size_t> cells);

  /// Atoms at the given cell centers with prescribed probabilities (absolutely continuous).
  [[nodiscard]] static DiscreteMeasure on_cells(const SampledSpace& space,
                                                std::span<const std::size_t> cells,
                                                std::vector<double> weights);
};

/// Time separation and causal relation for every (row, column) atom pair.
struct PairTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> tau;          ///< row-major
  std::vector<Relation> relation;   ///< row-major

  [[nodiscard]] double tau_at(std::size_t i, std::size_t j) const { return tau[i * cols + j]; }
  [[nodiscard]] Relation relation_at(std::size_t i, std::size_t j) const { return relation[i * cols + j]; }

  [[nodiscard]] static PairTable build(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                       const CausalKernel& kernel);

  /// Table from an explicit tau matrix; positive entries are chronological,
  /// zeros are null-related, negative entries mark non-causal pairs.
  [[nodiscard]] static PairTable from_matrix(std::size_t rows, std::size_t cols,
                                             std::vector<double> signed_tau);
};

struct CouplingEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double mass = 0.0;
};

/// Sparse nonnegative mass matrix between two discrete measures.
struct Coupling {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<CouplingEntry> entries;  ///< positive entries only
  bool causal = false;         ///< every positive entry joins a causal pair
  bool chronological = false;  ///< every positive entry joins a chronological pair
  ExtReal value_p;             ///< l_p cost of this coupling

  [[nodiscard]] double at(std::size_t i, std::size_t j) const;
  [[nodiscard]] std::vector<double> row_sums() const;
  [[nodiscard]] std::vector<double> col_sums() const;

  /// Recomputes the causal / chronological flags against a pair table.
  void classify(const PairTable& table);
};

struct TransportResult {
  Coupling coupling;
  ExtReal objective;         ///< l_p(mu0, mu1); -inf when no causal coupling exists
  bool feasible = false;
  double monge_defect = 0.0; ///< share of first-marginal mass split across >= 2 targets
  std::size_t pivots = 0;
};

/// (sum mass_ij tau_ij^p)^{1/p}, or -inf if any mass sits on a non-causal pair.
/// Throws std::invalid_argument for p outside (0, 1].
[[nodiscard]] ExtReal lp_cost(const Coupling& coupling, const PairTable& table, double p);
[[nodiscard]] ExtReal lp_cost(const Coupling& coupling, const DiscreteMeasure& mu0,
                              const DiscreteMeasure& mu1, double p, const CausalKernel& kernel);

/// Options for the exact l_p transport solve.
struct TransportOptions {
  lp::SimplexOptions simplex;
  /// Optional per-pair penalty subtracted (times `penalty_weight`) from tau^p;
  /// row-major, same shape as the pair table. Used for secondary selection.
  std::span<const double> penalty;
  double penalty_weight = 0.0;
};

/// Maximizes sum mass_ij tau_ij^p over couplings supported on causal pairs.
[[nodiscard]] TransportResult solve_transport_table(std::span<const double> w0, std::span<const double> w1,
                                                    const PairTable& table, double p,
                                                    const TransportOptions& options = {});

[[nodiscard]] TransportResult solve_lp_optimal(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                               double p, const CausalKernel& kernel,
                                               const TransportOptions& options = {});

/// True iff every support pair is chronological (sufficient for strong
/// timelike p-dualizability; not necessary).
[[nodiscard]] bool is_strongly_dualizable_sufficient(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                                     const CausalKernel& kernel);

/// Operational witness: the returned optimal coupling is chronological.
[[nodiscard]] bool is_timelike_dualizable(const TransportResult& result);

/// l_p(mu, sigma) >= l_p(mu, nu) + l_p(nu, sigma) under `inf - inf := -inf`.
[[nodiscard]] CheckReport verify_lp_reverse_triangle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                                     const DiscreteMeasure& sigma_m, double p,
                                                     const CausalKernel& kernel);

/// {"mu0": [{"at": [...], "w": ...}, ...], "mu1": [...], "p": 0.5}.
struct TransportInstance {
  DiscreteMeasure mu0;
  DiscreteMeasure mu1;
  double p = 0.5;
};
[[nodiscard]] TransportInstance transport_instance_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const TransportInstance& instance);

/// CSV triplets "i,j,mass".
[[nodiscard]] std::string coupling_to_csv(const Coupling& coupling);

}  // namespace lorot
