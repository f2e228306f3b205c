#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lorot/check_report.hpp"
#include "lorot/entropy.hpp"
#include "lorot/geodesics.hpp"
#include "lorot/transport.hpp"

namespace lorot {

/// Raised when an instance lacks a chronological optimal coupling.
class DualizabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant {
  TCD_reduced,
  TCD_full,
  TCD_entropic,
  TMCP_reduced,
  TMCP_full,
  TMCP_entropic,
  pathwise_reduced,
  pathwise_full,
};

[[nodiscard]] const char* to_string(Variant v);
[[nodiscard]] Variant variant_from_string(const std::string& s);

/// True for the variants built on tau_{K,N'} rather than sigma_{K,N'}.
[[nodiscard]] bool uses_tau_coefficients(Variant v);

struct ConditionSpec {
  Variant variant = Variant::TCD_reduced;
  double K = 0.0;
  double N = 2.0;
  double p = 0.5;
  std::vector<double> nprime_grid;  ///< empty selects {N, N+1, 2N, 10N}
  std::vector<double> t_grid;       ///< empty selects {0, 1/4, 1/2, 3/4, 1}

  /// Throws std::invalid_argument on N < 1, p outside (0, 1), N' < N, or
  /// times that are not dyadic rationals in [0, 1].
  void validate() const;
  [[nodiscard]] std::vector<double> nprimes() const;
  [[nodiscard]] std::vector<double> times() const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static ConditionSpec from_json(const nlohmann::json& j);
};

struct CheckOptions {
  /// Absolute tolerance; when unset it is slack_constant * cell diameter.
  std::optional<double> eps;
  double slack_constant = 1.0;
  DensityMethod density = DensityMethod::nearest_cell;
  unsigned curve_levels = 6;  ///< curves sampled on 2^levels + 1 nodes
  TransportOptions transport;

  [[nodiscard]] double tolerance(const SampledSpace& space) const;
};

/// sigma_{K,N'}^{(t)} or tau_{K,N'}^{(t)} depending on `tau_version`.
[[nodiscard]] ExtReal distortion(bool tau_version, double K, double nprime, double t, double theta);

/// TCD / TCD* / TCD^e along the solver's optimal plan. Throws
/// std::invalid_argument for non-absolutely-continuous inputs or a variant
/// outside the TCD family, DualizabilityError when the optimal coupling is
/// not chronological.
[[nodiscard]] CheckReport check_tcd(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                    const ConditionSpec& spec, const CausalKernel& kernel,
                                    const GeodesicOracle& oracle, const SampledSpace& space,
                                    const CheckOptions& options = {});

/// Pointwise inequality along every plan curve. `rho0` and `rho1` must be
/// recovered on `space`; a plan endpoint with zero density throws.
[[nodiscard]] CheckReport check_pathwise(const GeodesicPlan& plan, const DensityField& rho0,
                                         const DensityField& rho1, const ConditionSpec& spec,
                                         const CausalKernel& kernel, const SampledSpace& space,
                                         const CheckOptions& options = {});

/// TMCP / TMCP* / TMCP^e toward the Dirac mass at x1 (times t < 1).
[[nodiscard]] CheckReport check_tmcp(const DiscreteMeasure& mu0, const Event& x1, const ConditionSpec& spec,
                                     const CausalKernel& kernel, const GeodesicOracle& oracle,
                                     const SampledSpace& space, const CheckOptions& options = {});

/// Midpoint inequality at t = 1/2 with theta = sup tau (K < 0) or inf tau.
[[nodiscard]] CheckReport midpoint_check(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                         const ConditionSpec& spec, const CausalKernel& kernel,
                                         const GeodesicOracle& oracle, const SampledSpace& space,
                                         const CheckOptions& options = {});

/// Brunn-Minkowski for cell sets A0, A1 at time t: entries "tau" and
/// "sigma" per N'. discretization["mass_At"] holds the measured m[A_t].
[[nodiscard]] CheckReport brunn_minkowski(std::span<const std::size_t> A0, std::span<const std::size_t> A1,
                                          double t, double K, const std::vector<double>& nprime_grid,
                                          const CausalKernel& kernel, const GeodesicOracle& oracle,
                                          const SampledSpace& space, const CheckOptions& options = {});

struct BonnetMyersBounds {
  double full = 0.0;     ///< pi sqrt((N - 1) / K)
  double reduced = 0.0;  ///< pi sqrt(N / K)
};

/// Throws std::invalid_argument for K <= 0 or N < 1.
[[nodiscard]] BonnetMyersBounds bonnet_myers_bound(double K, double N);

/// Largest tau over all ordered pairs of sampled points.
[[nodiscard]] double scan_sup_tau(const SampledSpace& space, const CausalKernel& kernel);

/// Compares scan_sup_tau against both bounds.
[[nodiscard]] CheckReport bonnet_myers_check(const SampledSpace& space, const CausalKernel& kernel, double K,
                                             double N);

/// Bishop-Gromov ratios for the tau-star-shaped cell set E around x.
[[nodiscard]] CheckReport bishop_gromov(const Event& x, std::span<const std::size_t> E, double r, double R,
                                        double K, double N, double delta, const SampledSpace& space,
                                        const CausalKernel& kernel, const GeodesicOracle& oracle,
                                        const CheckOptions& options = {});

struct DyadicInterpolant {
  double t = 0.0;
  DiscreteMeasure measure;
  double sup_density = 0.0;
  double excess = 0.0;  ///< F_c at the global threshold
};

struct GoodGeodesicResult {
  std::vector<GeodesicPlan> segments;  ///< finest-level plans, in time order
  std::vector<DyadicInterpolant> interpolants;
  double threshold = 0.0;
  CheckReport report;
};

/// Dyadic bisection of depth >= 1; every midpoint is taken from an optimal
/// plan between its neighbours, re-solved with an excess-aligned penalty
/// when the plain solve overshoots the level threshold.
[[nodiscard]] GoodGeodesicResult good_geodesic_bisect(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                                      const ConditionSpec& spec, unsigned depth,
                                                      const CausalKernel& kernel, const GeodesicOracle& oracle,
                                                      const SampledSpace& space,
                                                      const CheckOptions& options = {});

/// Density and entropy bounds along the contraction toward x1 at the
/// dyadic times k / 2^depth < 1.
[[nodiscard]] GoodGeodesicResult tmcp_good_geodesic(const DiscreteMeasure& mu0, const Event& x1,
                                                    const ConditionSpec& spec, unsigned depth,
                                                    const CausalKernel& kernel, const GeodesicOracle& oracle,
                                                    const SampledSpace& space,
                                                    const CheckOptions& options = {});

/// Sum over plan pairs and cells of min(mass_a, mass_b) between interpolants.
[[nodiscard]] CheckReport mutual_singularity_probe(const std::vector<GeodesicPlan>& plans,
                                                   const std::vector<double>& t_grid, const SampledSpace& space);

}  // namespace lorot
