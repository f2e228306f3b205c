#include "lorot/transport.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lorot {

namespace {

void require_exponent(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("l_p transport needs p in (0, 1]");
}

// Entries below this share of the total mass are treated as structural zeros.
constexpr double kMassFloor = 1e-14;

}  // namespace

void DiscreteMeasure::validate() const {
  if (atoms.empty()) throw std::invalid_argument("DiscreteMeasure: no atoms");
  if (atoms.size() != weights.size()) throw std::invalid_argument("DiscreteMeasure: atoms/weights size mismatch");
  if (!cells.empty() && cells.size() != atoms.size()) throw std::invalid_argument("DiscreteMeasure: cells/atoms size mismatch");
  if (!footprint.empty() && footprint.size() != atoms.size()) {
    throw std::invalid_argument("DiscreteMeasure: footprint/atoms size mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("DiscreteMeasure: weights must be finite and >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
  const std::size_t d = atoms.front().dim();
  for (const auto& a : atoms) {
    if (a.dim() != d) throw std::invalid_argument("DiscreteMeasure: mixed atom dimensions");
  }
}

DiscreteMeasure DiscreteMeasure::dirac(Event at) {
  DiscreteMeasure m;
  m.atoms.push_back(std::move(at));
  m.weights.push_back(1.0);
  return m;
}

DiscreteMeasure DiscreteMeasure::uniform_on_cells(const SampledSpace& space, std::span<const std::size_t> cells) {
  if (cells.empty()) throw std::invalid_argument("uniform_on_cells: empty cell set");
  double total = 0.0;
  for (auto c : cells) total += space.mass(c);
  std::vector<double> w;
  w.reserve(cells.size());
  for (auto c : cells) w.push_back(space.mass(c) / total);
  return on_cells(space, cells, std::move(w));
}

DiscreteMeasure DiscreteMeasure::on_cells(const SampledSpace& space, std::span<const std::size_t> cells,
                                          std::vector<double> weights) {
  if (cells.size() != weights.size()) throw std::invalid_argument("on_cells: cells/weights size mismatch");
  DiscreteMeasure m;
  m.is_ac = true;
  m.weights = std::move(weights);
  for (auto c : cells) {
    m.atoms.push_back(space.point(c));
    m.cells.push_back(c);
  }
  m.footprint.assign(cells.size(), 1.0);
  m.validate();
  return m;
}

PairTable PairTable::build(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, const CausalKernel& kernel) {
  PairTable t;
  t.rows = mu0.size();
  t.cols = mu1.size();
  t.tau.resize(t.rows * t.cols);
  t.relation.resize(t.rows * t.cols);
  for (std::size_t i = 0; i < t.rows; ++i) {
    for (std::size_t j = 0; j < t.cols; ++j) {
      const Relation r = kernel.relation(mu0.atoms[i], mu1.atoms[j]);
      t.relation[i * t.cols + j] = r;
      t.tau[i * t.cols + j] = r == Relation::chronological ? kernel.tau(mu0.atoms[i], mu1.atoms[j]) : 0.0;
    }
  }
  return t;
}

PairTable PairTable::from_matrix(std::size_t rows, std::size_t cols, std::vector<double> signed_tau) {
  if (signed_tau.size() != rows * cols) throw std::invalid_argument("PairTable::from_matrix: shape mismatch");
  PairTable t;
  t.rows = rows;
  t.cols = cols;
  t.relation.resize(rows * cols);
  t.tau.resize(rows * cols);
  for (std::size_t k = 0; k < signed_tau.size(); ++k) {
    const double v = signed_tau[k];
    t.relation[k] = v > 0.0 ? Relation::chronological : (v == 0.0 ? Relation::causal_null : Relation::unrelated);
    t.tau[k] = std::max(v, 0.0);
  }
  return t;
}

double Coupling::at(std::size_t i, std::size_t j) const {
  double m = 0.0;
  for (const auto& e : entries) {
    if (e.row == i && e.col == j) m += e.mass;
  }
  return m;
}

std::vector<double> Coupling::row_sums() const {
  std::vector<double> s(rows, 0.0);
  for (const auto& e : entries) s[e.row] += e.mass;
  return s;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> s(cols, 0.0);
  for (const auto& e : entries) s[e.col] += e.mass;
  return s;
}

void Coupling::classify(const PairTable& table) {
  causal = true;
  chronological = true;
  for (const auto& e : entries) {
    if (e.mass <= 0.0) continue;
    const Relation r = table.relation_at(e.row, e.col);
    if (r == Relation::unrelated) causal = false;
    if (r != Relation::chronological) chronological = false;
  }
}

ExtReal lp_cost(const Coupling& coupling, const PairTable& table, double p) {
  require_exponent(p);
  double sum = 0.0;
  for (const auto& e : coupling.entries) {
    if (e.mass <= 0.0) continue;
    if (table.relation_at(e.row, e.col) == Relation::unrelated) return ExtReal::neg_infinity();
    sum += e.mass * std::pow(table.tau_at(e.row, e.col), p);
  }
  return std::pow(sum, 1.0 / p);
}

ExtReal lp_cost(const Coupling& coupling, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double p,
                const CausalKernel& kernel) {
  return lp_cost(coupling, PairTable::build(mu0, mu1, kernel), p);
}

TransportResult solve_transport_table(std::span<const double> w0, std::span<const double> w1, const PairTable& table,
                                      double p, const TransportOptions& options) {
  require_exponent(p);
  if (w0.size() != table.rows || w1.size() != table.cols) {
    throw std::invalid_argument("solve_transport_table: marginal sizes do not match the pair table");
  }
  const bool penalized = !options.penalty.empty() && options.penalty_weight != 0.0;
  if (penalized && options.penalty.size() != table.rows * table.cols) {
    throw std::invalid_argument("solve_transport_table: penalty shape mismatch");
  }

  std::vector<lp::Arc> arcs;
  arcs.reserve(table.rows * table.cols);
  for (std::size_t i = 0; i < table.rows; ++i) {
    for (std::size_t j = 0; j < table.cols; ++j) {
      const std::size_t k = i * table.cols + j;
      if (table.relation[k] == Relation::unrelated) continue;
      double gain = std::pow(table.tau[k], p);
      if (penalized) gain -= options.penalty_weight * options.penalty[k];
      arcs.push_back({i, j, -gain});
    }
  }

  TransportResult result;
  result.coupling.rows = table.rows;
  result.coupling.cols = table.cols;
  if (arcs.empty()) {
    result.objective = ExtReal::neg_infinity();
    return result;
  }

  const lp::TransportSolution sol = lp::solve_transport(w0, w1, arcs, options.simplex);
  result.pivots = sol.pivots;
  if (!sol.feasible) {
    result.objective = ExtReal::neg_infinity();
    return result;
  }
  result.feasible = true;
  const double total = std::accumulate(w0.begin(), w0.end(), 0.0);
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    if (sol.flow[a] > kMassFloor * total) {
      result.coupling.entries.push_back({arcs[a].row, arcs[a].col, sol.flow[a]});
    }
  }
  result.coupling.classify(table);
  result.coupling.value_p = lp_cost(result.coupling, table, p);
  result.objective = result.coupling.value_p;

  std::vector<std::size_t> targets(table.rows, 0);
  for (const auto& e : result.coupling.entries) ++targets[e.row];
  double split = 0.0;
  for (std::size_t i = 0; i < table.rows; ++i) {
    if (targets[i] >= 2) split += w0[i];
  }
  result.monge_defect = total > 0.0 ? split / total : 0.0;
  return result;
}

TransportResult solve_lp_optimal(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1, double p,
                                 const CausalKernel& kernel, const TransportOptions& options) {
  mu0.validate();
  mu1.validate();
  const PairTable table = PairTable::build(mu0, mu1, kernel);
  return solve_transport_table(mu0.weights, mu1.weights, table, p, options);
}

bool is_strongly_dualizable_sufficient(const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                                       const CausalKernel& kernel) {
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    if (mu0.weights[i] <= 0.0) continue;
    for (std::size_t j = 0; j < mu1.size(); ++j) {
      if (mu1.weights[j] <= 0.0) continue;
      if (!kernel.chronological(mu0.atoms[i], mu1.atoms[j])) return false;
    }
  }
  return true;
}

bool is_timelike_dualizable(const TransportResult& result) {
  return result.feasible && result.coupling.chronological;
}

CheckReport verify_lp_reverse_triangle(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const DiscreteMeasure& sigma_m, double p, const CausalKernel& kernel) {
  const ExtReal l_mu_sigma = solve_lp_optimal(mu, sigma_m, p, kernel).objective;
  const ExtReal l_mu_nu = solve_lp_optimal(mu, nu, p, kernel).objective;
  const ExtReal l_nu_sigma = solve_lp_optimal(nu, sigma_m, p, kernel).objective;
  const ExtReal rhs = l_mu_nu + l_nu_sigma;

  CheckReport report;
  report.name = "lp_reverse_triangle";
  report.tolerance = 1e-9;
  report.spec = {{"p", p}};
  // -inf on the right is satisfied by anything, including -inf on the left.
  const ExtReal margin = rhs.is_neg_inf() ? ExtReal::pos_infinity() : l_mu_sigma - rhs;
  report.add({.label = "l_p(mu,sigma) >= l_p(mu,nu) + l_p(nu,sigma)", .lhs = l_mu_sigma, .rhs = rhs, .margin = margin});
  return report;
}

namespace {

DiscreteMeasure measure_from_json(const nlohmann::json& j) {
  DiscreteMeasure m;
  for (const auto& atom : j) {
    m.atoms.emplace_back(atom.at("at").get<std::vector<double>>());
    m.weights.push_back(atom.at("w").get<double>());
  }
  m.validate();
  return m;
}

nlohmann::json measure_to_json(const DiscreteMeasure& m) {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto c = m.atoms[i].coords();
    out.push_back({{"at", std::vector<double>(c.begin(), c.end())}, {"w", m.weights[i]}});
  }
  return out;
}

}  // namespace

TransportInstance transport_instance_from_json(const nlohmann::json& j) {
  TransportInstance inst;
  inst.mu0 = measure_from_json(j.at("mu0"));
  inst.mu1 = measure_from_json(j.at("mu1"));
  inst.p = j.value("p", 0.5);
  require_exponent(inst.p);
  return inst;
}

nlohmann::json to_json(const TransportInstance& instance) {
  return {{"mu0", measure_to_json(instance.mu0)}, {"mu1", measure_to_json(instance.mu1)}, {"p", instance.p}};
}

std::string coupling_to_csv(const Coupling& coupling) {
  std::ostringstream os;
  os << std::setprecision(17) << "i,j,mass\n";
  for (const auto& e : coupling.entries) os << e.row << ',' << e.col << ',' << e.mass << '\n';
  return os.str();
}

}  // namespace lorot
