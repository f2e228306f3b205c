#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lorot/spacetime.hpp"
#include "lorot/transport.hpp"

namespace lorot {

struct CurveSample {
  double s = 0.0;
  Event point;
};

/// Sampled polyline with strictly increasing parameters in [0, 1].
class Curve {
 public:
  Curve() = default;
  explicit Curve(std::vector<CurveSample> samples);

  [[nodiscard]] const std::vector<CurveSample>& samples() const { return samples_; }
  [[nodiscard]] std::size_t size() const { return samples_.size(); }
  [[nodiscard]] const Event& front() const { return samples_.front().point; }
  [[nodiscard]] const Event& back() const { return samples_.back().point; }

  /// Piecewise-linear evaluation; s is clamped to the sampled range.
  [[nodiscard]] Event at(double s) const;

 private:
  std::vector<CurveSample> samples_;
};

/// 2^levels + 1 equally spaced nodes in [0, 1].
[[nodiscard]] std::vector<double> dyadic_grid(unsigned levels = 6);

/// Connects chronologically related events by a maximizing curve.
struct GeodesicOracle {
  std::function<Curve(const Event&, const Event&, std::span<const double>)> connect;
};

/// Affine segments; throws std::invalid_argument unless x << y.
[[nodiscard]] GeodesicOracle minkowski_oracle();

/// Resamples `curve` on its own parameter nodes so that
/// tau(c_0, c_t) = t tau(c_0, c_1). Throws std::invalid_argument if the curve
/// is not timelike or tau(c_0, .) is not strictly increasing on the samples.
[[nodiscard]] Curve reparametrize_proper_time(const Curve& curve, const CausalKernel& kernel);

/// Weighted family of curves; the (e_0, e_1) push-forward is the coupling
/// it was built from. `source`/`target` index the atoms of `mu0`/`mu1`.
struct GeodesicPlan {
  struct Pair {
    std::size_t source = 0;
    std::size_t target = 0;
    double mass = 0.0;
    double footprint0 = 0.0;  ///< box side of this pair's share at the start
    double footprint1 = 0.0;  ///< box side of this pair's share at the end
    Curve curve;
  };
  std::vector<Pair> pairs;
  double p = 0.5;
  DiscreteMeasure mu0;
  DiscreteMeasure mu1;

  /// Mass-weighted L^2 norm of tau(gamma_0, gamma_1).
  [[nodiscard]] double tau_l2(const CausalKernel& kernel) const;
};

/// One curve per positive coupling entry. Throws std::invalid_argument if
/// the result is infeasible or the coupling is not chronological.
[[nodiscard]] GeodesicPlan build_plan(const TransportResult& result, const DiscreteMeasure& mu0,
                                      const DiscreteMeasure& mu1, const GeodesicOracle& oracle,
                                      std::span<const double> sample_grid, double p);

/// Plan whose coupling is mu0 (x) delta_{x1}.
[[nodiscard]] GeodesicPlan build_product_plan(const DiscreteMeasure& mu0, const Event& x1,
                                              const CausalKernel& kernel, const GeodesicOracle& oracle,
                                              std::span<const double> sample_grid, double p);

/// (e_t)_# plan. Atoms within 1e-12 merge. t = 0 and t = 1 return mu0 and mu1.
[[nodiscard]] DiscreteMeasure interpolate(const GeodesicPlan& plan, double t);

/// Every curve re-indexed by r -> gamma_{(1-r)s + rt}; throws unless 0 <= s < t <= 1.
[[nodiscard]] GeodesicPlan restrict_plan(const GeodesicPlan& plan, double s, double t);

/// CSV rows "pair,mass,s,x0,x1,...".
[[nodiscard]] std::string plan_to_csv(const GeodesicPlan& plan);

/// Per-cell density with respect to the reference masses of a grid space.
///
/// `cells` is sorted; `density[k]` belongs to `cells[k]` and `cell_mass[k]`
/// is that cell's reference mass. Mass that is not absolutely continuous
/// (or falls outside the window) is kept in `singular_mass`.
struct DensityField {
  std::vector<std::size_t> cells;
  std::vector<double> density;
  std::vector<double> cell_mass;
  double singular_mass = 0.0;

  /// Density of a cell, 0 when the cell carries no mass.
  [[nodiscard]] double at(std::size_t cell) const;
  [[nodiscard]] double sup() const;
  [[nodiscard]] double ac_mass() const;
  /// Reference mass of the set {density > 0}.
  [[nodiscard]] double support_mass() const;
};

enum class DensityMethod {
  nearest_cell,  ///< all atom mass goes to the containing cell
  footprint,     ///< atom mass spread uniformly over its footprint box
};

[[nodiscard]] const char* to_string(DensityMethod m);
[[nodiscard]] DensityMethod density_method_from_string(const std::string& s);

/// Histogram of `mu` on the grid cells of `space`. Throws std::invalid_argument
/// when an atom lies outside the window or the space is not a grid.
[[nodiscard]] DensityField density_estimate(const DiscreteMeasure& mu, const SampledSpace& space,
                                            DensityMethod method = DensityMethod::nearest_cell);

/// Lebesgue decomposition used by the checkers: a measure not flagged
/// absolutely continuous is entirely singular; mass outside the window is
/// counted singular instead of raising.
[[nodiscard]] DensityField lebesgue_decomposition(const DiscreteMeasure& mu, const SampledSpace& space,
                                                  DensityMethod method = DensityMethod::nearest_cell);

}  // namespace lorot
