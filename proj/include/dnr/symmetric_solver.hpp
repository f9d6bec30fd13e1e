#pragma once

// Dense symmetric indefinite factorization (Bunch-Kaufman, LAPACK dsytrf)
// with inertia, used for the interior-point KKT systems.

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

namespace dnr {

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

class SymmetricIndefiniteSolver {
 public:
  /// Factorizes the lower triangle of K. Returns false when LAPACK reports an
  /// exactly singular block diagonal.
  bool factorize(const Eigen::MatrixXd& K, double zero_tol = 1e-40) {
    n_ = static_cast<lapack_int>(K.rows());
    factor_ = K;
    pivots_.assign(static_cast<std::size_t>(n_), 0);
    const lapack_int info =
        LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', n_, factor_.data(), n_, pivots_.data());
    ok_ = info >= 0;
    compute_inertia(zero_tol * std::max(1.0, K.cwiseAbs().maxCoeff()));
    return info == 0;
  }

  const Inertia& inertia() const { return inertia_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = rhs;
    LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', n_, 1, factor_.data(), n_, pivots_.data(), x.data(), n_);
    return x;
  }

 private:
  void compute_inertia(double tol) {
    inertia_ = {};
    for (lapack_int k = 0; k < n_;) {
      if (pivots_[k] > 0) {
        const double d = factor_(k, k);
        if (std::abs(d) <= tol) ++inertia_.zero;
        else if (d > 0) ++inertia_.positive;
        else ++inertia_.negative;
        ++k;
      } else {
        // 2x2 pivot block [a b; b c]
        const double a = factor_(k, k);
        const double b = factor_(k + 1, k);
        const double c = factor_(k + 1, k + 1);
        const double mean = 0.5 * (a + c);
        const double rad = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        for (double ev : {mean + rad, mean - rad}) {
          if (std::abs(ev) <= tol) ++inertia_.zero;
          else if (ev > 0) ++inertia_.positive;
          else ++inertia_.negative;
        }
        k += 2;
      }
    }
  }

  lapack_int n_ = 0;
  Eigen::MatrixXd factor_;
  std::vector<lapack_int> pivots_;
  Inertia inertia_;
  bool ok_ = false;
};

}  // namespace dnr
