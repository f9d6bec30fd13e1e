#pragma once

// Fixed-topology program over z = (p_inj, q_inj, p, q, l, v) for a spanning
// tree T and a load vector d:
//
//   min  sum_e r_e l_e
//   s.t. exact voltage drop on lines of T, branch current on every line,
//        zero flow on lines outside T, power balance, flow limits on T,
//        voltage box.
//
// The equality rows split into load-independent rows (drop, current, open
// flows) followed by the load-dependent balance rows; see fixed_rows() and
// load_rows().

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dnr/layout.hpp"
#include "dnr/model_dnr.hpp"
#include "dnr/topology.hpp"

namespace dnr {

class AuxModel {
 public:
  AuxModel(const Network& net, Topology topology)
      : AuxModel(net, std::move(topology), net.nominal_loads()) {}

  AuxModel(const Network& net, Topology topology, LoadVector loads)
      : net_(&net), topology_(std::move(topology)), loads_(std::move(loads)), layout_(net, false) {
    const Index nb = net.num_buses();
    const Index nl = net.num_lines();
    if (static_cast<Index>(topology_.u.size()) != nl)
      throw DimensionMismatch("topology does not match the network line count");
    if (!is_radial(net, topology_.u)) throw NotRadial("topology is not a spanning tree");
    if (loads_.p.size() != nb || loads_.q.size() != nb)
      throw DimensionMismatch("load vector must have one entry per bus");
    for (Index e = 0; e < nl; ++e) (topology_.is_on(e) ? on_ : off_).push_back(e);
    const Index non = static_cast<Index>(on_.size());
    const Index noff = static_cast<Index>(off_.size());
    blocks_.add_equality(label::kDropEquality, non);
    blocks_.add_equality(label::kBranchCurrent, nl);
    blocks_.add_equality(label::kOpenPFlow, noff);
    blocks_.add_equality(label::kOpenQFlow, noff);
    blocks_.add_equality(label::kPBalance, nb);
    blocks_.add_equality(label::kQBalance, nb);
    blocks_.add_inequality(label::kPFlowUpper, non);
    blocks_.add_inequality(label::kPFlowLower, non);
    blocks_.add_inequality(label::kQFlowUpper, non);
    blocks_.add_inequality(label::kQFlowLower, non);
    blocks_.add_inequality(label::kVoltageUpper, nb);
    blocks_.add_inequality(label::kVoltageLower, nb);
  }

  const Network& network() const { return *net_; }
  const Topology& topology() const { return topology_; }
  const LoadVector& loads() const { return loads_; }
  const Layout& layout() const { return layout_; }
  const ConstraintBlocks& blocks() const { return blocks_; }
  Index dimension() const { return layout_.size(); }
  Index num_equalities() const { return blocks_.num_equalities(); }
  Index num_inequalities() const { return blocks_.num_inequalities(); }

  /// Line indices inside / outside the tree, in network order.
  const std::vector<Index>& on_lines() const { return on_; }
  const std::vector<Index>& off_lines() const { return off_; }

  /// Load-independent equality rows, then the load-dependent balance rows.
  Index num_fixed_rows() const { return blocks_.equality(label::kPBalance).begin; }
  Index num_load_rows() const { return 2 * net_->num_buses(); }

  double objective(const Vec& z) const {
    detail::check_dimension(z, dimension());
    double f = 0.0;
    for (Index e = 0; e < net_->num_lines(); ++e) f += net_->lines()[e].r * z[layout_.l(e)];
    return f;
  }

  Vec objective_gradient(const Vec& z) const {
    detail::check_dimension(z, dimension());
    Vec g = Vec::Zero(dimension());
    for (Index e = 0; e < net_->num_lines(); ++e) g[layout_.l(e)] = net_->lines()[e].r;
    return g;
  }

  Vec equalities(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Vec g(num_equalities());
    const Index db = blocks_.equality(label::kDropEquality).begin;
    for (std::size_t k = 0; k < on_.size(); ++k) {
      const Index e = on_[k];
      const Line& ln = net.lines()[e];
      g[db + static_cast<Index>(k)] =
          2.0 * (ln.r * z[layout_.p(e)] + ln.x * z[layout_.q(e)]) -
          (ln.r * ln.r + ln.x * ln.x) * z[layout_.l(e)] -
          (z[layout_.v(net.from(e))] - z[layout_.v(net.to(e))]);
    }
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < net.num_lines(); ++e) {
      const double p = z[layout_.p(e)];
      const double q = z[layout_.q(e)];
      g[cb + e] = z[layout_.v(net.from(e))] * z[layout_.l(e)] - p * p - q * q;
    }
    const Index ob = blocks_.equality(label::kOpenPFlow).begin;
    const Index oq = blocks_.equality(label::kOpenQFlow).begin;
    for (std::size_t k = 0; k < off_.size(); ++k) {
      g[ob + static_cast<Index>(k)] = z[layout_.p(off_[k])];
      g[oq + static_cast<Index>(k)] = z[layout_.q(off_[k])];
    }
    const Index pb = blocks_.equality(label::kPBalance).begin;
    const Index qb = blocks_.equality(label::kQBalance).begin;
    for (Index n = 0; n < net.num_buses(); ++n) {
      double rp = z[layout_.p_inj(n)];
      double rq = z[layout_.q_inj(n)];
      for (Index e : net.inflow(n)) {
        const Line& ln = net.lines()[e];
        rp -= ln.r * z[layout_.l(e)] - z[layout_.p(e)];
        rq -= ln.x * z[layout_.l(e)] - z[layout_.q(e)];
      }
      for (Index e : net.outflow(n)) {
        rp -= z[layout_.p(e)];
        rq -= z[layout_.q(e)];
      }
      g[pb + n] = rp;
      g[qb + n] = rq;
    }
    return g;
  }

  Mat equality_jacobian(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Mat J = Mat::Zero(num_equalities(), dimension());
    const Index db = blocks_.equality(label::kDropEquality).begin;
    for (std::size_t k = 0; k < on_.size(); ++k) {
      const Index e = on_[k];
      const Index row = db + static_cast<Index>(k);
      const Line& ln = net.lines()[e];
      J(row, layout_.p(e)) = 2.0 * ln.r;
      J(row, layout_.q(e)) = 2.0 * ln.x;
      J(row, layout_.l(e)) = -(ln.r * ln.r + ln.x * ln.x);
      J(row, layout_.v(net.from(e))) = -1.0;
      J(row, layout_.v(net.to(e))) = 1.0;
    }
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < net.num_lines(); ++e) {
      const Index vf = layout_.v(net.from(e));
      J(cb + e, vf) = z[layout_.l(e)];
      J(cb + e, layout_.l(e)) = z[vf];
      J(cb + e, layout_.p(e)) = -2.0 * z[layout_.p(e)];
      J(cb + e, layout_.q(e)) = -2.0 * z[layout_.q(e)];
    }
    const Index ob = blocks_.equality(label::kOpenPFlow).begin;
    const Index oq = blocks_.equality(label::kOpenQFlow).begin;
    for (std::size_t k = 0; k < off_.size(); ++k) {
      J(ob + static_cast<Index>(k), layout_.p(off_[k])) = 1.0;
      J(oq + static_cast<Index>(k), layout_.q(off_[k])) = 1.0;
    }
    const Index pb = blocks_.equality(label::kPBalance).begin;
    const Index qb = blocks_.equality(label::kQBalance).begin;
    for (Index n = 0; n < net.num_buses(); ++n) {
      J(pb + n, layout_.p_inj(n)) = 1.0;
      J(qb + n, layout_.q_inj(n)) = 1.0;
      for (Index e : net.inflow(n)) {
        const Line& ln = net.lines()[e];
        J(pb + n, layout_.l(e)) -= ln.r;
        J(pb + n, layout_.p(e)) += 1.0;
        J(qb + n, layout_.l(e)) -= ln.x;
        J(qb + n, layout_.q(e)) += 1.0;
      }
      for (Index e : net.outflow(n)) {
        J(pb + n, layout_.p(e)) -= 1.0;
        J(qb + n, layout_.q(e)) -= 1.0;
      }
    }
    return J;
  }

  Vec inequalities(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Vec h(num_inequalities());
    const Index pu = blocks_.inequality(label::kPFlowUpper).begin;
    const Index pl = blocks_.inequality(label::kPFlowLower).begin;
    const Index qu = blocks_.inequality(label::kQFlowUpper).begin;
    const Index ql = blocks_.inequality(label::kQFlowLower).begin;
    for (std::size_t k = 0; k < on_.size(); ++k) {
      const Index e = on_[k];
      const Index i = static_cast<Index>(k);
      const Line& ln = net.lines()[e];
      h[pu + i] = z[layout_.p(e)] - ln.p_max;
      h[pl + i] = -z[layout_.p(e)] - ln.p_max;
      h[qu + i] = z[layout_.q(e)] - ln.q_max;
      h[ql + i] = -z[layout_.q(e)] - ln.q_max;
    }
    const Index vu = blocks_.inequality(label::kVoltageUpper).begin;
    const Index vl = blocks_.inequality(label::kVoltageLower).begin;
    for (Index n = 0; n < net.num_buses(); ++n) {
      const Bus& b = net.buses()[n];
      h[vu + n] = z[layout_.v(n)] - b.v_max * b.v_max;
      h[vl + n] = b.v_min * b.v_min - z[layout_.v(n)];
    }
    return h;
  }

  Mat inequality_jacobian(const Vec& z) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Mat J = Mat::Zero(num_inequalities(), dimension());
    const Index pu = blocks_.inequality(label::kPFlowUpper).begin;
    const Index pl = blocks_.inequality(label::kPFlowLower).begin;
    const Index qu = blocks_.inequality(label::kQFlowUpper).begin;
    const Index ql = blocks_.inequality(label::kQFlowLower).begin;
    for (std::size_t k = 0; k < on_.size(); ++k) {
      const Index e = on_[k];
      const Index i = static_cast<Index>(k);
      J(pu + i, layout_.p(e)) = 1.0;
      J(pl + i, layout_.p(e)) = -1.0;
      J(qu + i, layout_.q(e)) = 1.0;
      J(ql + i, layout_.q(e)) = -1.0;
    }
    const Index vu = blocks_.inequality(label::kVoltageUpper).begin;
    const Index vl = blocks_.inequality(label::kVoltageLower).begin;
    for (Index n = 0; n < net.num_buses(); ++n) {
      J(vu + n, layout_.v(n)) = 1.0;
      J(vl + n, layout_.v(n)) = -1.0;
    }
    return J;
  }

  Mat lagrangian_hessian(const Vec& z, double /*sigma*/, const Vec& lambda,
                         const Vec& /*mu*/) const {
    detail::check_dimension(z, dimension());
    const Network& net = *net_;
    Mat H = Mat::Zero(dimension(), dimension());
    const Index cb = blocks_.equality(label::kBranchCurrent).begin;
    for (Index e = 0; e < net.num_lines(); ++e) {
      const double w = lambda[cb + e];
      const Index vf = layout_.v(net.from(e));
      H(vf, layout_.l(e)) += w;
      H(layout_.l(e), vf) += w;
      H(layout_.p(e), layout_.p(e)) -= 2.0 * w;
      H(layout_.q(e), layout_.q(e)) -= 2.0 * w;
    }
    return H;
  }

  Vec lower_bounds() const {
    Vec lo = Vec::Constant(dimension(), -std::numeric_limits<double>::infinity());
    fill_fixed(lo);
    return lo;
  }
  Vec upper_bounds() const {
    Vec hi = Vec::Constant(dimension(), std::numeric_limits<double>::infinity());
    fill_fixed(hi);
    return hi;
  }

  std::vector<Index> free_indices() const { return DnrModel::detail_free(layout_, net_->root()); }

  void fill_fixed(Vec& z) const {
    for (Index n = 0; n < net_->num_buses(); ++n) {
      if (n == net_->root()) continue;
      z[layout_.p_inj(n)] = -loads_.p[n];
      z[layout_.q_inj(n)] = -loads_.q[n];
    }
  }

  std::vector<Index> active_set(const Vec& z, double tol) const {
    const Vec h = inequalities(z);
    const double thr = tol * (1.0 + z.lpNorm<Eigen::Infinity>());
    std::vector<Index> rows;
    for (Index i = 0; i < h.size(); ++i)
      if (std::abs(h[i]) <= thr) rows.push_back(i);
    return rows;
  }

  /// Moves a point to another load vector holding generation fixed:
  /// injection = generation - load at every bus.
  Vec shift_loads(const Vec& z, const LoadVector& to) const {
    detail::check_dimension(z, dimension());
    Vec out = z;
    for (Index n = 0; n < net_->num_buses(); ++n) {
      out[layout_.p_inj(n)] -= to.p[n] - loads_.p[n];
      out[layout_.q_inj(n)] -= to.q[n] - loads_.q[n];
    }
    return out;
  }

  /// Derivative of the balance rows with respect to the loads (p loads then q
  /// loads), at fixed generation. Computed by differencing the residuals.
  Mat load_sensitivity(const Vec& z, double step = 1.0) const {
    const Index nb = net_->num_buses();
    const Index rows = num_load_rows();
    const Index first = num_fixed_rows();
    const Vec base = equalities(z).segment(first, rows);
    Mat S(rows, 2 * nb);
    for (Index k = 0; k < 2 * nb; ++k) {
      LoadVector d = loads_;
      (k < nb ? d.p[k] : d.q[k - nb]) += step;
      S.col(k) = (equalities(shift_loads(z, d)).segment(first, rows) - base) / step;
    }
    return S;
  }

 private:
  const Network* net_;
  Topology topology_;
  LoadVector loads_;
  Layout layout_;
  ConstraintBlocks blocks_;
  std::vector<Index> on_;
  std::vector<Index> off_;
};

/// Appends the line states of `topology` to a fixed-topology point.
inline Vec embed(const Vec& z_aux, const Topology& topology) {
  const Index nl = static_cast<Index>(topology.u.size());
  if ((z_aux.size() - 3 * nl) % 3 != 0 || z_aux.size() < 3 * nl)
    throw DimensionMismatch("point size inconsistent with the topology");
  Vec z(z_aux.size() + nl);
  z.head(z_aux.size()) = z_aux;
  for (Index e = 0; e < nl; ++e) z[z_aux.size() + e] = topology.u[static_cast<std::size_t>(e)];
  return z;
}

/// Drops the line states of a full point.
inline Vec restrict_point(const Vec& z, Index num_lines) {
  if (z.size() < 4 * num_lines) throw DimensionMismatch("point too short to carry line states");
  return z.head(z.size() - num_lines);
}

/// Line states of a full point, rounded to {0, 1}.
inline std::vector<int> line_states(const Vec& z, Index num_lines) {
  std::vector<int> u(static_cast<std::size_t>(num_lines));
  for (Index e = 0; e < num_lines; ++e)
    u[static_cast<std::size_t>(e)] = z[z.size() - num_lines + e] >= 0.5 ? 1 : 0;
  return u;
}

inline AuxModel build_aux(const Network& net, const Topology& topology, const LoadVector& d) {
  return AuxModel(net, topology, d);
}

}  // namespace dnr
