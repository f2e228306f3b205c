#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lorot::lp {

/// Arc of a bipartite transportation network, supply row -> demand column.
struct Arc {
  std::size_t row = 0;
  std::size_t col = 0;
  double cost = 0.0;
};

enum class PivotRule {
  bland,         ///< first eligible arc in index order
  block_search,  ///< best arc within cyclic blocks of ~sqrt(#arcs)
};

struct SimplexOptions {
  PivotRule rule = PivotRule::block_search;
  double pivot_tolerance = 1e-11;  ///< relative to the largest |cost|
  std::size_t max_pivots = 0;      ///< 0 selects an automatic bound
};

struct TransportSolution {
  bool feasible = false;
  std::vector<double> flow;       ///< per input arc
  std::vector<double> row_price;  ///< dual potentials of the supply rows
  std::vector<double> col_price;  ///< dual potentials of the demand columns
  double cost = 0.0;              ///< sum of cost * flow over input arcs
  std::size_t pivots = 0;
};

/// Minimum-cost transportation problem by primal network simplex.
///
/// Arcs not listed are forbidden. Supplies and demands must be nonnegative
/// with equal totals (to 1e-9 relative). The returned flow is a basic
/// solution: its support is a forest with at most rows + cols - 1 arcs.
/// `feasible` is false when no flow satisfies the marginals on the given arcs.
[[nodiscard]] TransportSolution solve_transport(std::span<const double> supply,
                                                std::span<const double> demand,
                                                std::span<const Arc> arcs,
                                                const SimplexOptions& options = {});

}  // namespace lorot::lp
