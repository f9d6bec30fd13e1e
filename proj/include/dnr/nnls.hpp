#pragma once

// Least squares with a mix of free and sign-constrained variables:
//
//   min |A x - b|_2  s.t.  x_j >= 0 for j in the constrained set.
//
// Active-set method of Lawson and Hanson, with free variables kept in the
// passive set throughout and rank-deficient subproblems solved in the
// minimum-norm sense.

#include <algorithm>
#include <vector>

#include <Eigen/Dense>

#include "dnr/network.hpp"

namespace dnr {

struct NnlsResult {
  Vec x;
  double residual_norm = 0.0;  // |A x - b|_2
  int iterations = 0;
  bool converged = false;
};

inline NnlsResult nnls(const Mat& A, const Vec& b, const std::vector<bool>& constrained,
                       int max_iter = 0) {
  const Index n = A.cols();
  if (static_cast<Index>(constrained.size()) != n || A.rows() != b.size())
    throw DimensionMismatch("least-squares dimensions do not agree");
  if (max_iter <= 0) max_iter = static_cast<int>(3 * (n + 10));

  std::vector<bool> passive(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) passive[j] = !constrained[j];

  auto solve_passive = [&](const std::vector<bool>& P) {
    std::vector<Index> cols;
    for (Index j = 0; j < n; ++j)
      if (P[j]) cols.push_back(j);
    Vec s = Vec::Zero(n);
    if (cols.empty()) return s;
    Mat Ap(A.rows(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) Ap.col(static_cast<Index>(k)) = A.col(cols[k]);
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(Ap);
    const Vec sp = cod.solve(b);
    for (std::size_t k = 0; k < cols.size(); ++k) s[cols[k]] = sp[static_cast<Index>(k)];
    return s;
  };

  NnlsResult out;
  Vec x = solve_passive(passive);
  const double scale = std::max(1.0, A.cwiseAbs().maxCoeff()) * std::max(1.0, b.cwiseAbs().maxCoeff());
  const double wtol = 1e-12 * scale;
  int it = 0;
  for (; it < max_iter; ++it) {
    const Vec w = A.transpose() * (b - A * x);
    Index best = -1;
    double wmax = wtol;
    for (Index j = 0; j < n; ++j)
      if (constrained[j] && !passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    if (best < 0) {
      out.converged = true;
      break;
    }
    passive[best] = true;
    for (int inner = 0; inner < max_iter; ++inner) {
      const Vec s = solve_passive(passive);
      double alpha = 1.0;
      bool blocked = false;
      for (Index j = 0; j < n; ++j)
        if (constrained[j] && passive[j] && s[j] <= 0.0) {
          blocked = true;
          const double den = x[j] - s[j];
          if (den > 0.0) alpha = std::min(alpha, x[j] / den);
          else alpha = 0.0;
        }
      if (!blocked) {
        x = s;
        break;
      }
      x += alpha * (s - x);
      for (Index j = 0; j < n; ++j)
        if (constrained[j] && passive[j] && x[j] <= 1e-15 * scale) {
          passive[j] = false;
          x[j] = 0.0;
        }
    }
  }
  out.x = x;
  out.iterations = it;
  out.residual_norm = (A * x - b).norm();
  return out;
}

}  // namespace dnr
