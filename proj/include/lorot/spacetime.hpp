#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lorot/check_report.hpp"

namespace lorot {

/// A spacetime event; coordinate 0 is time.
class Event {
 public:
  Event() = default;
  explicit Event(std::vector<double> coords);
  Event(std::initializer_list<double> coords) : coords_(coords) {}

  [[nodiscard]] std::size_t dim() const { return coords_.size(); }
  [[nodiscard]] double time() const { return coords_.at(0); }
  [[nodiscard]] double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  [[nodiscard]] std::span<const double> coords() const { return coords_; }

  friend bool operator==(const Event&, const Event&) = default;

 private:
  std::vector<double> coords_;
};

/// (1 - s) a + s b.
[[nodiscard]] Event lerp(const Event& a, const Event& b, double s);

/// Max-norm distance.
[[nodiscard]] double max_distance(const Event& a, const Event& b);

enum class Relation { chronological, causal_null, unrelated };

[[nodiscard]] const char* to_string(Relation r);

/// Tolerance on dt - |dx| below which a causal pair is classified as null.
inline constexpr double kNullTolerance = 1e-12;

/// Causal structure and time separation of a spacetime.
///
/// Implementations must satisfy tau(x, y) > 0 iff relation(x, y) is
/// chronological, and tau(x, y) == 0 otherwise.
class CausalKernel {
 public:
  virtual ~CausalKernel() = default;

  [[nodiscard]] virtual Relation relation(const Event& x, const Event& y) const = 0;
  [[nodiscard]] virtual double tau(const Event& x, const Event& y) const = 0;

  [[nodiscard]] bool causal(const Event& x, const Event& y) const {
    return relation(x, y) != Relation::unrelated;
  }
  [[nodiscard]] bool chronological(const Event& x, const Event& y) const {
    return relation(x, y) == Relation::chronological;
  }
};

/// Minkowski space R^{1,n} with the time orientation of coordinate 0.
class MinkowskiKernel final : public CausalKernel {
 public:
  explicit MinkowskiKernel(std::size_t spatial_dim);

  [[nodiscard]] std::size_t spatial_dim() const { return n_; }
  [[nodiscard]] Relation relation(const Event& x, const Event& y) const override;
  [[nodiscard]] double tau(const Event& x, const Event& y) const override;

 private:
  void check(const Event& x, const Event& y) const;
  std::size_t n_;
};

[[nodiscard]] MinkowskiKernel minkowski_kernel(std::size_t n);

/// Axis-aligned box; axis 0 is time.
struct Box {
  std::vector<std::pair<double, double>> axes;

  [[nodiscard]] std::size_t dim() const { return axes.size(); }
  [[nodiscard]] double volume() const;
  [[nodiscard]] bool contains(const Event& e, double slack = 0.0) const;
};

/// Scalar weight V for the reference measure e^V vol.
///
/// `quadratic` uses coeffs = [c, b_0..b_n, q_0..q_n] and evaluates
/// V(z) = c + sum_i b_i z_i + 1/2 sum_i q_i z_i^2.
struct WeightField {
  enum class Kind { zero, quadratic };
  Kind kind = Kind::zero;
  std::vector<double> coeffs;

  [[nodiscard]] double operator()(const Event& z) const;
  [[nodiscard]] static WeightField constant(double c) { return {Kind::quadratic, {c}}; }
  [[nodiscard]] static WeightField from_json(const nlohmann::json& j);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Uniform cell-centered grid geometry.
struct GridGeometry {
  std::vector<double> lo;
  std::vector<double> h;
  std::vector<std::size_t> counts;

  [[nodiscard]] std::size_t flat_index(std::span<const std::size_t> idx) const;
};

/// Finite point cloud carrying a reference measure: the discrete Lorentzian
/// measured space. Immutable after construction.
class SampledSpace {
 public:
  /// Cell centers of a uniform grid, time-major ordering,
  /// mass_i = cell_volume * e^{V(center_i)}.
  static SampledSpace grid(const Box& bounds, const std::vector<std::size_t>& resolution,
                           const WeightField& weight = {});

  /// Arbitrary points with given positive masses (cell_volume is reported as 0).
  static SampledSpace point_cloud(std::vector<Event> points, std::vector<double> masses);

  [[nodiscard]] std::size_t size() const { return points_.size(); }
  [[nodiscard]] std::size_t spatial_dim() const { return dim_ - 1; }
  [[nodiscard]] const Event& point(std::size_t i) const { return points_.at(i); }
  [[nodiscard]] const std::vector<Event>& points() const { return points_; }
  [[nodiscard]] double mass(std::size_t i) const { return masses_.at(i); }
  [[nodiscard]] const std::vector<double>& masses() const { return masses_; }
  [[nodiscard]] double weight_value(std::size_t i) const { return weights_.at(i); }
  [[nodiscard]] double cell_volume() const { return cell_volume_; }
  [[nodiscard]] double total_mass() const;
  [[nodiscard]] const std::optional<GridGeometry>& geometry() const { return grid_; }

  /// Euclidean diameter of one grid cell (0 for point clouds).
  [[nodiscard]] double cell_diameter() const;

  /// Index of the cell containing `e` (grids, half-open cells, upper faces
  /// closed on the last cell) or of the nearest point (point clouds).
  [[nodiscard]] std::optional<std::size_t> locate(const Event& e) const;

  /// Index of a sampled point equal to `e` within kNullTolerance.
  [[nodiscard]] std::optional<std::size_t> find_point(const Event& e) const;

  /// Indices of points inside the box, in space order.
  [[nodiscard]] std::vector<std::size_t> indices_in_box(const Box& box) const;

 private:
  std::vector<Event> points_;
  std::vector<double> masses_;
  std::vector<double> weights_;
  double cell_volume_ = 0.0;
  std::size_t dim_ = 0;
  std::optional<GridGeometry> grid_;
};

[[nodiscard]] SampledSpace build_grid_space(const Box& bounds,
                                            const std::vector<std::size_t>& resolution,
                                            const WeightField& weight = {});

/// {"bounds": [[lo,hi],...], "resolution": [...], "weight": {"kind": ..., "coeffs": [...]}}.
[[nodiscard]] SampledSpace space_from_json(const nlohmann::json& j);

/// Indices y with x << y for some x in A.
[[nodiscard]] std::vector<std::size_t> chronological_future(const SampledSpace& space,
                                                            const CausalKernel& kernel,
                                                            std::span<const std::size_t> A);

/// Sampled points of J+(x) ∩ J-(y).
[[nodiscard]] std::vector<std::size_t> causal_diamond(const SampledSpace& space,
                                                      const CausalKernel& kernel, const Event& x,
                                                      const Event& y);

/// Sampled points of {y in I+(x) : tau(x, y) < r} ∪ {x}.
[[nodiscard]] std::vector<std::size_t> tau_ball(const SampledSpace& space,
                                                const CausalKernel& kernel, const Event& x,
                                                double r);

struct CausalTriple {
  Event x, y, z;
};

/// Minimum of tau(x,z) - tau(x,y) - tau(y,z) over causal chains x <= y <= z.
/// Throws std::invalid_argument when a triple is not a causal chain.
[[nodiscard]] CheckReport check_reverse_triangle(const CausalKernel& kernel,
                                                 std::span<const CausalTriple> triples);

}  // namespace lorot
