#pragma once

// Brute-force maximizer of sum x_ij c_ij over transport polytopes: every
// vertex is a basic solution, so enumerating all column subsets of size
// rank(A) finds the optimum. Only usable for tiny instances.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct EnumResult {
  bool feasible = false;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t vertices = 0;
};

// `allowed[i * cols + j]` marks admissible arcs; `gain` is row-major.
inline EnumResult enumerate_transport(const std::vector<double>& w0, const std::vector<double>& w1,
                                      const std::vector<char>& allowed, const std::vector<double>& gain) {
  const auto m = w0.size(), n = w1.size();
  std::vector<std::size_t> arcs;
  for (std::size_t k = 0; k < m * n; ++k) {
    if (allowed[k]) arcs.push_back(k);
  }
  EnumResult res;
  if (arcs.empty()) return res;

  const auto rows = static_cast<Eigen::Index>(m + n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(arcs.size()));
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < m; ++i) b(static_cast<Eigen::Index>(i)) = w0[i];
  for (std::size_t j = 0; j < n; ++j) b(static_cast<Eigen::Index>(m + j)) = w1[j];
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    A(static_cast<Eigen::Index>(arcs[a] / n), static_cast<Eigen::Index>(a)) = 1.0;
    A(static_cast<Eigen::Index>(m + arcs[a] % n), static_cast<Eigen::Index>(a)) = 1.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  const auto r = static_cast<std::size_t>(lu.rank());

  std::vector<std::size_t> pick(r);
  for (std::size_t k = 0; k < r; ++k) pick[k] = k;
  while (true) {
    Eigen::MatrixXd B(rows, static_cast<Eigen::Index>(r));
    for (std::size_t k = 0; k < r; ++k) B.col(static_cast<Eigen::Index>(k)) = A.col(static_cast<Eigen::Index>(pick[k]));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (static_cast<std::size_t>(qr.rank()) == r) {
      const Eigen::VectorXd x = qr.solve(b);
      if ((B * x - b).norm() < 1e-10 && x.minCoeff() > -1e-12) {
        double v = 0.0;
        for (std::size_t k = 0; k < r; ++k) v += x(static_cast<Eigen::Index>(k)) * gain[arcs[pick[k]]];
        res.feasible = true;
        ++res.vertices;
        res.best = std::max(res.best, v);
      }
    }
    // Next r-subset in lexicographic order.
    std::size_t k = r;
    while (k > 0 && pick[k - 1] == arcs.size() - r + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t q = k; q < r; ++q) pick[q] = pick[q - 1] + 1;
  }
  return res;
}

}  // namespace oracle
