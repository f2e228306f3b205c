#include "lorot/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lorot {

namespace {

constexpr double kMergeTolerance = 1e-12;

struct RawAtom {
  Event at;
  double mass;
  double footprint;
};

bool lex_less(const Event& a, const Event& b) {
  const auto ca = a.coords();
  const auto cb = b.coords();
  return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end());
}

// Merges atoms at the same position (and with the same footprint). Sorting is
// lexicographic, so equal positions up to the tolerance sit in a window of
// nearby first coordinates; the back-scan covers that window.
DiscreteMeasure merge_atoms(std::vector<RawAtom> raw, bool is_ac) {
  std::sort(raw.begin(), raw.end(), [](const RawAtom& a, const RawAtom& b) { return lex_less(a.at, b.at); });
  DiscreteMeasure out;
  out.is_ac = is_ac;
  for (auto& r : raw) {
    bool merged = false;
    for (std::size_t k = out.atoms.size(); k-- > 0;) {
      if (r.at[0] - out.atoms[k][0] > kMergeTolerance) break;
      if (max_distance(out.atoms[k], r.at) <= kMergeTolerance &&
          std::abs(out.footprint[k] - r.footprint) <= kMergeTolerance) {
        out.weights[k] += r.mass;
        merged = true;
        break;
      }
    }
    if (!merged) {
      out.atoms.push_back(std::move(r.at));
      out.weights.push_back(r.mass);
      out.footprint.push_back(r.footprint);
    }
  }
  return out;
}

double footprint_at(const GeodesicPlan::Pair& pair, double t) {
  return (1.0 - t) * pair.footprint0 + t * pair.footprint1;
}

// Side of the box carried by `share` of an atom with total weight `weight`
// and footprint `fp`, assuming the share is a similar sub-box.
double share_footprint(double fp, double share, double weight, std::size_t dim) {
  if (fp == 0.0 || weight <= 0.0) return 0.0;
  return fp * std::pow(share / weight, 1.0 / static_cast<double>(dim));
}

}  // namespace

Curve::Curve(std::vector<CurveSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 2) throw std::invalid_argument("Curve: needs at least two samples");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const double s = samples_[i].s;
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("Curve: parameters must lie in [0, 1]");
    if (i > 0 && !(s > samples_[i - 1].s)) throw std::invalid_argument("Curve: parameters must increase strictly");
    if (samples_[i].point.dim() != samples_[0].point.dim()) throw std::invalid_argument("Curve: mixed dimensions");
  }
}

Event Curve::at(double s) const {
  if (s <= samples_.front().s) return samples_.front().point;
  if (s >= samples_.back().s) return samples_.back().point;
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), s,
                                   [](double v, const CurveSample& c) { return v < c.s; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  if (s == a.s) return a.point;
  return lerp(a.point, b.point, (s - a.s) / (b.s - a.s));
}

std::vector<double> dyadic_grid(unsigned levels) {
  if (levels > 20) throw std::invalid_argument("dyadic_grid: too many levels");
  const std::size_t n = std::size_t{1} << levels;
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = static_cast<double>(k) / static_cast<double>(n);
  return g;
}

GeodesicOracle minkowski_oracle() {
  GeodesicOracle oracle;
  oracle.connect = [](const Event& x, const Event& y, std::span<const double> grid) {
    const MinkowskiKernel kernel(x.dim() - 1);
    if (!kernel.chronological(x, y)) {
      throw std::invalid_argument("minkowski_oracle: endpoints are not chronologically related");
    }
    if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0) {
      throw std::invalid_argument("minkowski_oracle: sample grid must run from 0 to 1");
    }
    std::vector<CurveSample> samples;
    samples.reserve(grid.size());
    for (double s : grid) {
      samples.push_back({s, s == 0.0 ? x : (s == 1.0 ? y : lerp(x, y, s))});
    }
    return Curve(std::move(samples));
  };
  return oracle;
}

Curve reparametrize_proper_time(const Curve& curve, const CausalKernel& kernel) {
  const auto& smp = curve.samples();
  const Event& x = curve.front();
  const double total = kernel.tau(x, curve.back());
  if (!(total > 0.0)) throw std::invalid_argument("reparametrize_proper_time: curve is not timelike");
  std::vector<double> psi(smp.size(), 0.0);
  for (std::size_t i = 1; i < smp.size(); ++i) {
    psi[i] = kernel.tau(x, smp[i].point) / total;
    if (!(psi[i] > psi[i - 1])) {
      throw std::invalid_argument("reparametrize_proper_time: proper time is not strictly increasing along the samples");
    }
  }
  psi.back() = 1.0;
  const double s0 = smp.front().s;
  const double s1 = smp.back().s;
  std::vector<CurveSample> out;
  out.reserve(smp.size());
  std::size_t seg = 0;
  for (std::size_t k = 0; k < smp.size(); ++k) {
    const double target = (smp[k].s - s0) / (s1 - s0);
    if (k == 0) {
      out.push_back({smp[k].s, smp.front().point});
      continue;
    }
    if (k + 1 == smp.size()) {
      out.push_back({smp[k].s, smp.back().point});
      continue;
    }
    while (seg + 1 < psi.size() - 1 && psi[seg + 1] < target) ++seg;
    const double lambda = (target - psi[seg]) / (psi[seg + 1] - psi[seg]);
    out.push_back({smp[k].s, lerp(smp[seg].point, smp[seg + 1].point, std::clamp(lambda, 0.0, 1.0))});
  }
  return Curve(std::move(out));
}

double GeodesicPlan::tau_l2(const CausalKernel& kernel) const {
  double sum = 0.0;
  for (const auto& pr : pairs) {
    const double tau = kernel.tau(pr.curve.front(), pr.curve.back());
    sum += pr.mass * tau * tau;
  }
  return std::sqrt(sum);
}

GeodesicPlan build_plan(const TransportResult& result, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        const GeodesicOracle& oracle, std::span<const double> sample_grid, double p) {
  if (!result.feasible) throw std::invalid_argument("build_plan: transport problem is infeasible");
  if (!result.coupling.chronological) {
    throw std::invalid_argument("build_plan: coupling charges a non-chronological pair; no timelike curve exists");
  }
  if (result.coupling.rows != mu0.size() || result.coupling.cols != mu1.size()) {
    throw std::invalid_argument("build_plan: coupling shape does not match the measures");
  }
  GeodesicPlan plan;
  plan.p = p;
  plan.mu0 = mu0;
  plan.mu1 = mu1;
  const std::size_t dim = mu0.atoms.front().dim();
  for (const auto& e : result.coupling.entries) {
    GeodesicPlan::Pair pr;
    pr.source = e.row;
    pr.target = e.col;
    pr.mass = e.mass;
    pr.footprint0 = share_footprint(mu0.footprint_of(e.row), e.mass, mu0.weights[e.row], dim);
    pr.footprint1 = share_footprint(mu1.footprint_of(e.col), e.mass, mu1.weights[e.col], dim);
    pr.curve = oracle.connect(mu0.atoms[e.row], mu1.atoms[e.col], sample_grid);
    plan.pairs.push_back(std::move(pr));
  }
  return plan;
}

GeodesicPlan build_product_plan(const DiscreteMeasure& mu0, const Event& x1, const CausalKernel& kernel,
                                const GeodesicOracle& oracle, std::span<const double> sample_grid, double p) {
  mu0.validate();
  GeodesicPlan plan;
  plan.p = p;
  plan.mu0 = mu0;
  plan.mu1 = DiscreteMeasure::dirac(x1);
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (mu0.weights[i] <= 0.0) continue;
    if (!kernel.chronological(mu0.atoms[i], x1)) {
      throw std::invalid_argument("build_product_plan: target is not in the chronological future of every source atom");
    }
    GeodesicPlan::Pair pr;
    pr.source = i;
    pr.target = 0;
    pr.mass = mu0.weights[i];
    pr.footprint0 = mu0.footprint_of(i);
    pr.footprint1 = 0.0;
    pr.curve = oracle.connect(mu0.atoms[i], x1, sample_grid);
    plan.pairs.push_back(std::move(pr));
  }
  return plan;
}

DiscreteMeasure interpolate(const GeodesicPlan& plan, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate: t must lie in [0, 1]");
  if (t == 0.0) return plan.mu0;
  if (t == 1.0) return plan.mu1;
  std::vector<RawAtom> raw;
  raw.reserve(plan.pairs.size());
  for (const auto& pr : plan.pairs) raw.push_back({pr.curve.at(t), pr.mass, footprint_at(pr, t)});
  return merge_atoms(std::move(raw), plan.mu0.is_ac || plan.mu1.is_ac);
}

GeodesicPlan restrict_plan(const GeodesicPlan& plan, double s, double t) {
  if (!(s >= 0.0 && t <= 1.0 && s < t)) throw std::invalid_argument("restrict_plan: needs 0 <= s < t <= 1");
  GeodesicPlan out;
  out.p = plan.p;
  const bool ac = plan.mu0.is_ac || plan.mu1.is_ac;
  out.mu0.is_ac = s == 0.0 ? plan.mu0.is_ac : ac;
  out.mu1.is_ac = t == 1.0 ? plan.mu1.is_ac : ac;
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    const auto& pr = plan.pairs[k];
    std::vector<CurveSample> samples;
    samples.reserve(pr.curve.size());
    for (const auto& smp : pr.curve.samples()) samples.push_back({smp.s, pr.curve.at((1.0 - smp.s) * s + smp.s * t)});
    GeodesicPlan::Pair np;
    np.source = k;
    np.target = k;
    np.mass = pr.mass;
    np.footprint0 = footprint_at(pr, s);
    np.footprint1 = footprint_at(pr, t);
    np.curve = Curve(std::move(samples));
    out.mu0.atoms.push_back(np.curve.front());
    out.mu0.weights.push_back(np.mass);
    out.mu0.footprint.push_back(np.footprint0);
    out.mu1.atoms.push_back(np.curve.back());
    out.mu1.weights.push_back(np.mass);
    out.mu1.footprint.push_back(np.footprint1);
    out.pairs.push_back(std::move(np));
  }
  return out;
}

std::string plan_to_csv(const GeodesicPlan& plan) {
  std::ostringstream os;
  os << std::setprecision(17) << "pair,mass,s";
  const std::size_t dim = plan.pairs.empty() ? 0 : plan.pairs.front().curve.front().dim();
  for (std::size_t a = 0; a < dim; ++a) os << ",x" << a;
  os << '\n';
  for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
    for (const auto& smp : plan.pairs[k].curve.samples()) {
      os << k << ',' << plan.pairs[k].mass << ',' << smp.s;
      for (double c : smp.point.coords()) os << ',' << c;
      os << '\n';
    }
  }
  return os.str();
}

double DensityField::at(std::size_t cell) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return 0.0;
  return density[static_cast<std::size_t>(it - cells.begin())];
}

double DensityField::sup() const {
  double m = 0.0;
  for (double d : density) m = std::max(m, d);
  return m;
}

double DensityField::ac_mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) m += density[k] * cell_mass[k];
  return m;
}

double DensityField::support_mass() const {
  double m = 0.0;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (density[k] > 0.0) m += cell_mass[k];
  }
  return m;
}

const char* to_string(DensityMethod m) {
  return m == DensityMethod::footprint ? "footprint" : "nearest_cell";
}

DensityMethod density_method_from_string(const std::string& s) {
  if (s == "nearest_cell") return DensityMethod::nearest_cell;
  if (s == "footprint") return DensityMethod::footprint;
  throw std::invalid_argument("density method must be \"nearest_cell\" or \"footprint\", got \"" + s + "\"");
}

namespace {

// Distributes `mass` over the cells met by the box of side fp * h_a centred
// at `at`. Returns the mass that fell outside the window.
double deposit_box(const GridGeometry& g, const Event& at, double fp, double mass, std::vector<double>& acc) {
  const std::size_t d = g.counts.size();
  std::vector<std::size_t> first(d), last(d);
  std::vector<std::vector<double>> frac(d);
  double inside_share = 1.0;
  for (std::size_t a = 0; a < d; ++a) {
    const double half = 0.5 * fp * g.h[a];
    const double lo = (at[a] - half - g.lo[a]) / g.h[a];
    const double hi = (at[a] + half - g.lo[a]) / g.h[a];
    const double n = static_cast<double>(g.counts[a]);
    const double clo = std::clamp(lo, 0.0, n);
    const double chi = std::clamp(hi, 0.0, n);
    if (!(chi > clo)) return mass;
    inside_share *= (chi - clo) / (hi - lo);
    first[a] = static_cast<std::size_t>(std::floor(clo));
    last[a] = std::min(static_cast<std::size_t>(std::ceil(chi)), g.counts[a]);
    if (last[a] <= first[a]) last[a] = first[a] + 1;
    for (std::size_t k = first[a]; k < last[a]; ++k) {
      const double kk = static_cast<double>(k);
      const double overlap = std::min(chi, kk + 1.0) - std::max(clo, kk);
      frac[a].push_back(std::max(overlap, 0.0) / (hi - lo));
    }
  }
  std::vector<std::size_t> idx(first);
  while (true) {
    double w = mass;
    for (std::size_t a = 0; a < d; ++a) w *= frac[a][idx[a] - first[a]];
    if (w > 0.0) acc[g.flat_index(idx)] += w;
    std::size_t a = d;
    while (a-- > 0) {
      if (++idx[a] < last[a]) break;
      idx[a] = first[a];
    }
    if (a == static_cast<std::size_t>(-1)) break;
  }
  return mass * (1.0 - inside_share);
}

DensityField histogram(const DiscreteMeasure& mu, const SampledSpace& space, DensityMethod method, bool strict) {
  std::vector<double> acc(space.size(), 0.0);
  DensityField field;
  const auto& geo = space.geometry();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double m = mu.weights[i];
    if (m <= 0.0) continue;
    const double fp = mu.footprint_of(i);
    if (method == DensityMethod::footprint && fp > 0.0 && geo) {
      if (strict && !space.locate(mu.atoms[i])) {
        throw std::invalid_argument("density_estimate: atom outside the space window");
      }
      const double outside = deposit_box(*geo, mu.atoms[i], fp, m, acc);
      if (outside > 1e-12 * m && strict) {
        throw std::invalid_argument("density_estimate: atom footprint leaves the space window");
      }
      field.singular_mass += outside;
      continue;
    }
    const auto cell = space.locate(mu.atoms[i]);
    if (!cell) {
      if (strict) throw std::invalid_argument("density_estimate: atom outside the space window");
      field.singular_mass += m;
      continue;
    }
    acc[*cell] += m;
  }
  for (std::size_t c = 0; c < acc.size(); ++c) {
    if (acc[c] <= 0.0) continue;
    field.cells.push_back(c);
    field.cell_mass.push_back(space.mass(c));
    field.density.push_back(acc[c] / space.mass(c));
  }
  return field;
}

}  // namespace

DensityField density_estimate(const DiscreteMeasure& mu, const SampledSpace& space, DensityMethod method) {
  return histogram(mu, space, method, true);
}

DensityField lebesgue_decomposition(const DiscreteMeasure& mu, const SampledSpace& space, DensityMethod method) {
  if (!mu.is_ac) {
    DensityField field;
    field.singular_mass = std::accumulate(mu.weights.begin(), mu.weights.end(), 0.0);
    return field;
  }
  return histogram(mu, space, method, false);
}

}  // namespace lorot
