#pragma once

#include <random>
#include <string>

#include "dnr/dnr.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) { return std::string(DNR_DATA_DIR) + "/" + name; }

inline dnr::Network load(const std::string& name) { return dnr::load_network(data_path(name)); }

/// Central differences of a vector function, column by column.
template <class F>
dnr::Mat fd_jacobian(F f, const dnr::Vec& z, double h = 1e-6) {
  const dnr::Vec f0 = f(z);
  dnr::Mat J(f0.size(), z.size());
  for (dnr::Index j = 0; j < z.size(); ++j) {
    dnr::Vec zp = z, zm = z;
    const double step = h * std::max(1.0, std::abs(z[j]));
    zp[j] += step;
    zm[j] -= step;
    J.col(j) = (f(zp) - f(zm)) / (2.0 * step);
  }
  return J;
}

/// max |A - B| / max(1, max |B|)
inline double rel_err(const dnr::Mat& A, const dnr::Mat& B) {
  if (A.size() == 0) return 0.0;
  return (A - B).cwiseAbs().maxCoeff() / std::max(1.0, B.cwiseAbs().maxCoeff());
}

/// Random point inside the variable box of a layout: flows, currents and
/// voltages drawn uniformly, u in [0, 1].
inline dnr::Vec random_point(const dnr::Network& net, const dnr::Layout& lay, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  dnr::Vec z(lay.size());
  for (dnr::Index n = 0; n < net.num_buses(); ++n) {
    z[lay.p_inj(n)] = sym(rng);
    z[lay.q_inj(n)] = sym(rng);
    z[lay.v(n)] = 0.8 + 0.4 * unit(rng);
  }
  for (dnr::Index e = 0; e < net.num_lines(); ++e) {
    z[lay.p(e)] = sym(rng);
    z[lay.q(e)] = sym(rng);
    z[lay.l(e)] = unit(rng);
    if (lay.with_u) z[lay.u(e)] = unit(rng);
  }
  return z;
}

}  // namespace testutil
