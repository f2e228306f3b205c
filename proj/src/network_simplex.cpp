#include "lorot/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lorot::lp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Spanning-tree network simplex on the bipartite graph plus an artificial
// root joined to every node. Arcs are uncapacitated, so a non-tree arc is
// always at flow zero. The tree is kept strongly feasible (zero-flow tree
// arcs point away from the root) via the last-blocking-arc leaving rule.
class Simplex {
 public:
  Simplex(std::span<const double> supply, std::span<const double> demand, std::span<const Arc> arcs,
          const SimplexOptions& options)
      : rows_(supply.size()),
        cols_(demand.size()),
        real_arcs_(arcs.size()),
        nodes_(rows_ + cols_ + 1),
        root_(rows_ + cols_),
        options_(options) {
    double total_supply = 0.0;
    double total_demand = 0.0;
    for (double s : supply) {
      if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("solve_transport: supplies must be finite and >= 0");
      total_supply += s;
    }
    for (double d : demand) {
      if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("solve_transport: demands must be finite and >= 0");
      total_demand += d;
    }
    const double scale = std::max({total_supply, total_demand, 1e-300});
    if (std::abs(total_supply - total_demand) > 1e-9 * scale) {
      throw std::invalid_argument("solve_transport: marginal mismatch (supply " + std::to_string(total_supply) +
                                  " vs demand " + std::to_string(total_demand) + ")");
    }
    flow_eps_ = 1e-14 * scale;
    feasibility_tol_ = 1e-9 * scale;

    double max_cost = 0.0;
    for (const auto& a : arcs) {
      if (a.row >= rows_ || a.col >= cols_) throw std::invalid_argument("solve_transport: arc endpoint out of range");
      if (!std::isfinite(a.cost)) throw std::invalid_argument("solve_transport: arc costs must be finite");
      max_cost = std::max(max_cost, std::abs(a.cost));
    }
    price_tol_ = options_.pivot_tolerance * std::max(max_cost, 1.0);
    const double artificial = static_cast<double>(nodes_ + 1) * std::max(max_cost, 1.0) + 1.0;

    const std::size_t total_arcs = real_arcs_ + rows_ + cols_;
    source_.resize(total_arcs);
    target_.resize(total_arcs);
    cost_.resize(total_arcs);
    flow_.assign(total_arcs, 0.0);
    in_tree_.assign(total_arcs, false);
    for (std::size_t k = 0; k < real_arcs_; ++k) {
      source_[k] = arcs[k].row;
      target_[k] = rows_ + arcs[k].col;
      cost_[k] = arcs[k].cost;
    }

    parent_.assign(nodes_, kNone);
    pred_.assign(nodes_, kNone);
    up_.assign(nodes_, false);
    pi_.assign(nodes_, 0.0);
    depth_.assign(nodes_, 0);
    for (std::size_t v = 0; v < rows_ + cols_; ++v) {
      const std::size_t a = real_arcs_ + v;
      const bool is_row = v < rows_;
      const double amount = is_row ? supply[v] : demand[v - rows_];
      cost_[a] = artificial;
      flow_[a] = amount;
      in_tree_[a] = true;
      parent_[v] = root_;
      pred_[v] = a;
      depth_[v] = 1;
      if (is_row && amount > 0.0) {
        // v -> root carries the supply upward.
        source_[a] = v;
        target_[a] = root_;
        up_[v] = true;
        pi_[v] = -artificial;
      } else {
        source_[a] = root_;
        target_[a] = v;
        up_[v] = false;
        pi_[v] = artificial;
      }
    }

    max_pivots_ = options_.max_pivots != 0 ? options_.max_pivots : 200 * (total_arcs + nodes_) + 10000;
    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(total_arcs))));
  }

  TransportSolution run() {
    TransportSolution out;
    while (true) {
      const std::size_t entering = options_.rule == PivotRule::bland ? price_bland() : price_block();
      if (entering == kNone) break;
      pivot(entering);
      if (++pivots_ > max_pivots_) {
        throw std::runtime_error("solve_transport: pivot limit exceeded (" + std::to_string(max_pivots_) + ")");
      }
    }
    out.pivots = pivots_;
    out.feasible = true;
    for (std::size_t a = real_arcs_; a < flow_.size(); ++a) {
      if (flow_[a] > feasibility_tol_) out.feasible = false;
    }
    out.flow.assign(flow_.begin(), flow_.begin() + static_cast<std::ptrdiff_t>(real_arcs_));
    for (std::size_t k = 0; k < real_arcs_; ++k) out.cost += cost_[k] * out.flow[k];
    out.row_price.assign(pi_.begin(), pi_.begin() + static_cast<std::ptrdiff_t>(rows_));
    out.col_price.assign(pi_.begin() + static_cast<std::ptrdiff_t>(rows_),
                         pi_.begin() + static_cast<std::ptrdiff_t>(rows_ + cols_));
    return out;
  }

 private:
  [[nodiscard]] double reduced_cost(std::size_t a) const { return cost_[a] + pi_[source_[a]] - pi_[target_[a]]; }

  std::size_t price_bland() const {
    for (std::size_t a = 0; a < cost_.size(); ++a) {
      if (!in_tree_[a] && reduced_cost(a) < -price_tol_) return a;
    }
    return kNone;
  }

  std::size_t price_block() {
    const std::size_t total = cost_.size();
    std::size_t best = kNone;
    double best_rc = -price_tol_;
    std::size_t scanned_in_block = 0;
    for (std::size_t step = 0; step < total; ++step) {
      const std::size_t a = (next_arc_ + step) % total;
      if (!in_tree_[a]) {
        const double rc = reduced_cost(a);
        if (rc < best_rc) {
          best_rc = rc;
          best = a;
        }
      }
      if (++scanned_in_block == block_) {
        scanned_in_block = 0;
        if (best != kNone) {
          next_arc_ = (a + 1) % total;
          return best;
        }
      }
    }
    return best;
  }

  void pivot(std::size_t in) {
    const std::size_t first = source_[in];
    const std::size_t second = target_[in];

    std::size_t u = first;
    std::size_t v = second;
    while (u != v) {
      if (depth_[u] > depth_[v]) {
        u = parent_[u];
      } else if (depth_[v] > depth_[u]) {
        v = parent_[v];
      } else {
        u = parent_[u];
        v = parent_[v];
      }
    }
    const std::size_t join = u;

    // Leaving arc: last blocking arc along the cycle orientation from join.
    double delta = kInf;
    std::size_t u_out = kNone;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      if (up_[w]) {
        const double d = flow_[pred_[w]];
        if (d < delta - flow_eps_) {
          delta = d;
          u_out = w;
        }
      }
    }
    for (std::size_t w = second; w != join; w = parent_[w]) {
      if (!up_[w]) {
        const double d = flow_[pred_[w]];
        if (d <= delta + flow_eps_) {
          delta = std::min(delta, d);
          u_out = w;
        }
      }
    }
    if (u_out == kNone) throw std::logic_error("solve_transport: unbounded cycle");
    delta = std::max(delta, 0.0);

    if (delta > 0.0) {
      flow_[in] += delta;
      for (std::size_t w = first; w != join; w = parent_[w]) {
        double& f = flow_[pred_[w]];
        f += up_[w] ? -delta : delta;
        if (f < flow_eps_) f = std::max(f, 0.0);
      }
      for (std::size_t w = second; w != join; w = parent_[w]) {
        double& f = flow_[pred_[w]];
        f += up_[w] ? delta : -delta;
        if (f < flow_eps_) f = std::max(f, 0.0);
      }
    }

    // Which side of the cycle holds the leaving arc decides the re-hang.
    bool on_first = false;
    for (std::size_t w = first; w != join; w = parent_[w]) {
      if (w == u_out) {
        on_first = true;
        break;
      }
    }
    const std::size_t leaving = pred_[u_out];
    flow_[leaving] = 0.0;
    in_tree_[leaving] = false;
    in_tree_[in] = true;

    const std::size_t u_in = on_first ? first : second;
    const std::size_t v_in = on_first ? second : first;
    std::size_t node = u_in;
    std::size_t new_parent = v_in;
    std::size_t new_pred = in;
    bool new_up = source_[in] == u_in;
    while (true) {
      const std::size_t old_parent = parent_[node];
      const std::size_t old_pred = pred_[node];
      const bool old_up = up_[node];
      parent_[node] = new_parent;
      pred_[node] = new_pred;
      up_[node] = new_up;
      if (node == u_out) break;
      new_parent = node;
      new_pred = old_pred;
      new_up = !old_up;
      node = old_parent;
    }

    refresh_tree();
  }

  void refresh_tree() {
    // Children in CSR form, then a breadth-first sweep from the root.
    child_start_.assign(nodes_ + 1, 0);
    for (std::size_t v = 0; v < nodes_; ++v) {
      if (v != root_) ++child_start_[parent_[v] + 1];
    }
    std::partial_sum(child_start_.begin(), child_start_.end(), child_start_.begin());
    children_.assign(nodes_, 0);
    fill_.assign(child_start_.begin(), child_start_.end() - 1);
    for (std::size_t v = 0; v < nodes_; ++v) {
      if (v != root_) children_[fill_[parent_[v]]++] = v;
    }
    queue_.clear();
    queue_.push_back(root_);
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::size_t p = queue_[head];
      for (std::size_t k = child_start_[p]; k < child_start_[p + 1]; ++k) {
        const std::size_t c = children_[k];
        depth_[c] = depth_[p] + 1;
        const double arc_cost = cost_[pred_[c]];
        pi_[c] = up_[c] ? pi_[p] - arc_cost : pi_[p] + arc_cost;
        queue_.push_back(c);
      }
    }
  }

  std::size_t rows_, cols_, real_arcs_, nodes_, root_;
  SimplexOptions options_;
  double flow_eps_ = 0.0;
  double feasibility_tol_ = 0.0;
  double price_tol_ = 0.0;
  std::size_t max_pivots_ = 0;
  std::size_t pivots_ = 0;
  std::size_t block_ = 0;
  std::size_t next_arc_ = 0;

  std::vector<std::size_t> source_, target_;
  std::vector<double> cost_, flow_;
  std::vector<bool> in_tree_;

  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<bool> up_;
  std::vector<double> pi_;

  std::vector<std::size_t> child_start_, children_, fill_, queue_;
};

}  // namespace

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const Arc> arcs, const SimplexOptions& options) {
  if (supply.empty() || demand.empty()) throw std::invalid_argument("solve_transport: empty marginal");
  Simplex simplex(supply, demand, arcs, options);
  return simplex.run();
}

}  // namespace lorot::lp
