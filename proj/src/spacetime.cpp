#include "lorot/spacetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lorot {

Event::Event(std::vector<double> coords) : coords_(std::move(coords)) {
  for (double c : coords_) {
    if (!std::isfinite(c)) throw std::invalid_argument("Event: coordinates must be finite");
  }
}

Event lerp(const Event& a, const Event& b, double s) {
  if (a.dim() != b.dim()) throw std::invalid_argument("lerp: dimension mismatch");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = (1.0 - s) * a[i] + s * b[i];
  return Event(std::move(out));
}

double max_distance(const Event& a, const Event& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::chronological: return "chronological";
    case Relation::causal_null: return "causal_null";
    default: return "unrelated";
  }
}

MinkowskiKernel::MinkowskiKernel(std::size_t spatial_dim) : n_(spatial_dim) {
  if (n_ == 0) throw std::invalid_argument("MinkowskiKernel: n must be >= 1");
}

void MinkowskiKernel::check(const Event& x, const Event& y) const {
  if (x.dim() != n_ + 1 || y.dim() != n_ + 1) {
    throw std::invalid_argument("MinkowskiKernel: events must have " + std::to_string(n_ + 1) +
                                " coordinates");
  }
}

namespace {

struct Split {
  double dt;
  double dx;  // Euclidean norm of the spatial displacement
};

Split split(const Event& x, const Event& y) {
  double sq = 0.0;
  for (std::size_t i = 1; i < x.dim(); ++i) {
    const double d = y[i] - x[i];
    sq += d * d;
  }
  return {y[0] - x[0], std::sqrt(sq)};
}

}  // namespace

Relation MinkowskiKernel::relation(const Event& x, const Event& y) const {
  check(x, y);
  const auto [dt, dx] = split(x, y);
  const double gap = dt - dx;
  if (std::abs(gap) <= kNullTolerance && dt >= -kNullTolerance) return Relation::causal_null;
  if (gap > 0.0) return Relation::chronological;
  return Relation::unrelated;
}

double MinkowskiKernel::tau(const Event& x, const Event& y) const {
  if (relation(x, y) != Relation::chronological) return 0.0;
  const auto [dt, dx] = split(x, y);
  return std::sqrt((dt - dx) * (dt + dx));
}

MinkowskiKernel minkowski_kernel(std::size_t n) { return MinkowskiKernel(n); }

double Box::volume() const {
  double v = 1.0;
  for (const auto& [lo, hi] : axes) v *= hi - lo;
  return v;
}

bool Box::contains(const Event& e, double slack) const {
  if (e.dim() != axes.size()) return false;
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (e[i] < axes[i].first - slack || e[i] > axes[i].second + slack) return false;
  }
  return true;
}

double WeightField::operator()(const Event& z) const {
  if (kind == Kind::zero) return 0.0;
  const std::size_t d = z.dim();
  double v = coeffs.empty() ? 0.0 : coeffs[0];
  for (std::size_t i = 0; i < d; ++i) {
    if (1 + i < coeffs.size()) v += coeffs[1 + i] * z[i];
    if (1 + d + i < coeffs.size()) v += 0.5 * coeffs[1 + d + i] * z[i] * z[i];
  }
  return v;
}

WeightField WeightField::from_json(const nlohmann::json& j) {
  WeightField w;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "zero") {
    w.kind = Kind::zero;
  } else if (kind == "quadratic") {
    w.kind = Kind::quadratic;
    w.coeffs = j.value("coeffs", std::vector<double>{});
  } else {
    throw std::invalid_argument("weight.kind must be \"zero\" or \"quadratic\", got \"" + kind + "\"");
  }
  return w;
}

nlohmann::json WeightField::to_json() const {
  if (kind == Kind::zero) return {{"kind", "zero"}};
  return {{"kind", "quadratic"}, {"coeffs", coeffs}};
}

std::size_t GridGeometry::flat_index(std::span<const std::size_t> idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < counts.size(); ++a) flat = flat * counts[a] + idx[a];
  return flat;
}

SampledSpace SampledSpace::grid(const Box& bounds, const std::vector<std::size_t>& resolution,
                                const WeightField& weight) {
  const std::size_t d = bounds.dim();
  if (d < 2) throw std::invalid_argument("grid space needs a time axis and at least one spatial axis");
  if (resolution.size() != d) throw std::invalid_argument("grid space: resolution/bounds rank mismatch");
  GridGeometry geo;
  for (std::size_t a = 0; a < d; ++a) {
    const auto [lo, hi] = bounds.axes[a];
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("grid space: bounds must be finite");
    if (!(hi > lo)) throw std::invalid_argument("grid space: degenerate box on axis " + std::to_string(a));
    if (resolution[a] == 0) throw std::invalid_argument("grid space: zero resolution on axis " + std::to_string(a));
    geo.lo.push_back(lo);
    geo.h.push_back((hi - lo) / static_cast<double>(resolution[a]));
    geo.counts.push_back(resolution[a]);
  }

  SampledSpace s;
  s.dim_ = d;
  s.cell_volume_ = std::accumulate(geo.h.begin(), geo.h.end(), 1.0, std::multiplies<>());
  std::size_t total = 1;
  for (auto c : resolution) total *= c;
  s.points_.reserve(total);
  s.masses_.reserve(total);
  s.weights_.reserve(total);

  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::vector<double> c(d);
    for (std::size_t a = 0; a < d; ++a) c[a] = geo.lo[a] + (static_cast<double>(idx[a]) + 0.5) * geo.h[a];
    Event center(std::move(c));
    const double v = weight(center);
    s.weights_.push_back(v);
    s.masses_.push_back(s.cell_volume_ * std::exp(v));
    s.points_.push_back(std::move(center));
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < geo.counts[a]) break;
      idx[a] = 0;
    }
  }
  s.grid_ = std::move(geo);
  return s;
}

SampledSpace SampledSpace::point_cloud(std::vector<Event> points, std::vector<double> masses) {
  if (points.empty()) throw std::invalid_argument("point cloud: no points");
  if (points.size() != masses.size()) throw std::invalid_argument("point cloud: points/masses size mismatch");
  SampledSpace s;
  s.dim_ = points.front().dim();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != s.dim_) throw std::invalid_argument("point cloud: mixed dimensions");
    if (!(masses[i] > 0.0)) throw std::invalid_argument("point cloud: masses must be positive");
  }
  s.points_ = std::move(points);
  s.masses_ = std::move(masses);
  s.weights_.assign(s.points_.size(), 0.0);
  return s;
}

double SampledSpace::total_mass() const {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

double SampledSpace::cell_diameter() const {
  if (!grid_) return 0.0;
  double sq = 0.0;
  for (double h : grid_->h) sq += h * h;
  return std::sqrt(sq);
}

std::optional<std::size_t> SampledSpace::locate(const Event& e) const {
  if (e.dim() != dim_) return std::nullopt;
  if (!grid_) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points_.size(); ++i) {
      double sq = 0.0;
      for (std::size_t a = 0; a < dim_; ++a) {
        const double d = e[a] - points_[i][a];
        sq += d * d;
      }
      if (sq < best_d) {
        best_d = sq;
        best = i;
      }
    }
    return best;
  }
  constexpr double kEdgeSlack = 1e-9;
  std::vector<std::size_t> idx(dim_);
  for (std::size_t a = 0; a < dim_; ++a) {
    const double v = (e[a] - grid_->lo[a]) / grid_->h[a];
    const auto n = static_cast<double>(grid_->counts[a]);
    if (v < -kEdgeSlack || v > n + kEdgeSlack) return std::nullopt;
    // Points on a shared face go to the upper cell, also under rounding noise.
    const double f = std::floor(v + kEdgeSlack);
    idx[a] = f < 0.0 ? 0 : std::min(static_cast<std::size_t>(f), grid_->counts[a] - 1);
  }
  return grid_->flat_index(idx);
}

std::optional<std::size_t> SampledSpace::find_point(const Event& e) const {
  if (grid_) {
    const auto cell = locate(e);
    if (cell && max_distance(points_[*cell], e) <= kNullTolerance) return cell;
    return std::nullopt;
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (max_distance(points_[i], e) <= kNullTolerance) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> SampledSpace::indices_in_box(const Box& box) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (box.contains(points_[i])) out.push_back(i);
  }
  return out;
}

SampledSpace build_grid_space(const Box& bounds, const std::vector<std::size_t>& resolution,
                              const WeightField& weight) {
  return SampledSpace::grid(bounds, resolution, weight);
}

SampledSpace space_from_json(const nlohmann::json& j) {
  Box box;
  for (const auto& axis : j.at("bounds")) {
    if (!axis.is_array() || axis.size() != 2) throw std::invalid_argument("space.bounds entries must be [lo, hi]");
    box.axes.emplace_back(axis[0].get<double>(), axis[1].get<double>());
  }
  const auto res = j.at("resolution").get<std::vector<std::size_t>>();
  WeightField w;
  if (j.contains("weight")) w = WeightField::from_json(j.at("weight"));
  return SampledSpace::grid(box, res, w);
}

std::vector<std::size_t> chronological_future(const SampledSpace& space, const CausalKernel& kernel,
                                               std::span<const std::size_t> A) {
  if (A.empty()) throw std::invalid_argument("chronological_future: A must be nonempty");
  std::vector<std::size_t> out;
  for (std::size_t y = 0; y < space.size(); ++y) {
    for (std::size_t x : A) {
      if (kernel.chronological(space.point(x), space.point(y))) {
        out.push_back(y);
        break;
      }
    }
  }
  return out;
}

std::vector<std::size_t> causal_diamond(const SampledSpace& space, const CausalKernel& kernel,
                                        const Event& x, const Event& y) {
  std::vector<std::size_t> out;
  if (!kernel.causal(x, y)) return out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Event& z = space.point(i);
    if (kernel.causal(x, z) && kernel.causal(z, y)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> tau_ball(const SampledSpace& space, const CausalKernel& kernel,
                                  const Event& x, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("tau_ball: r must be > 0");
  const auto self = space.find_point(x);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Event& y = space.point(i);
    if ((self && *self == i) || (kernel.chronological(x, y) && kernel.tau(x, y) < r)) out.push_back(i);
  }
  return out;
}

CheckReport check_reverse_triangle(const CausalKernel& kernel, std::span<const CausalTriple> triples) {
  CheckReport report;
  report.name = "reverse_triangle";
  report.tolerance = 1e-12;
  report.spec = {{"triples", triples.size()}};
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& [x, y, z] = triples[k];
    if (!kernel.causal(x, y) || !kernel.causal(y, z)) {
      throw std::invalid_argument("check_reverse_triangle: triple " + std::to_string(k) +
                                  " is not a causal chain");
    }
    const double lhs = kernel.tau(x, z);
    const double rhs = kernel.tau(x, y) + kernel.tau(y, z);
    report.add({.label = "triple", .t = static_cast<double>(k), .lhs = lhs, .rhs = rhs, .margin = lhs - rhs});
  }
  return report;
}

}  // namespace lorot
