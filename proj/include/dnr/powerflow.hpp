#pragma once

// Backward/forward sweep power flow on a radial topology. Independent of the
// model assembly code; used as a test oracle and as a warm start for the
// fixed-topology solves.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "dnr/layout.hpp"
#include "dnr/network.hpp"
#include "dnr/topology.hpp"

namespace dnr {

struct PowerFlowOptions {
  /// Squared root voltage. Defaults to the midpoint of the root's squared box.
  std::optional<double> root_v;
  double tol = 1e-14;
  int max_iter = 500;
  /// Reject solutions outside voltage or flow limits.
  bool check_limits = true;
};

/// Solves the branch-flow equations of the tree. Returns a point in the
/// fixed-topology layout (3N + 3L entries, off lines carry zero flow).
inline Vec power_flow_oracle(const Network& net, const Topology& topology, const LoadVector& d,
                             const PowerFlowOptions& opt = {}) {
  const Index nb = net.num_buses();
  const Index nl = net.num_lines();
  if (static_cast<Index>(topology.u.size()) != nl)
    throw DimensionMismatch("topology does not match the network line count");
  if (!is_radial(net, topology.u)) throw NotRadial("topology is not a spanning tree");
  if (d.p.size() != nb || d.q.size() != nb)
    throw DimensionMismatch("load vector must have one entry per bus");

  // Orient the tree away from the root.
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(nb));
  for (Index e = 0; e < nl; ++e) {
    if (!topology.is_on(e)) continue;
    adj[net.from(e)].push_back(e);
    adj[net.to(e)].push_back(e);
  }
  const Index root = net.root();
  std::vector<Index> order{root};
  std::vector<Index> parent_line(static_cast<std::size_t>(nb), -1);
  std::vector<Index> parent(static_cast<std::size_t>(nb), -1);
  std::vector<char> seen(static_cast<std::size_t>(nb), 0);
  seen[root] = 1;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Index a = order[k];
    for (Index e : adj[a]) {
      const Index b = net.from(e) == a ? net.to(e) : net.from(e);
      if (seen[b]) continue;
      seen[b] = 1;
      parent[b] = a;
      parent_line[b] = e;
      order.push_back(b);
    }
  }

  const Bus& rb = net.buses()[root];
  const double v0 = opt.root_v.value_or(0.5 * (rb.v_min * rb.v_min + rb.v_max * rb.v_max));
  Vec v = Vec::Constant(nb, v0);
  Vec P = Vec::Zero(nb);  // sending-end flow into each non-root bus from its parent
  Vec Q = Vec::Zero(nb);
  Vec cur = Vec::Zero(nb);  // squared current of the parent line
  bool converged = false;
  for (int it = 0; it < opt.max_iter; ++it) {
    Vec Pn = Vec::Zero(nb), Qn = Vec::Zero(nb);
    // Backward: receiving-end flow = own load + sending-end flows to children.
    for (auto k = order.size(); k-- > 1;) {
      const Index b = order[k];
      const Line& ln = net.lines()[parent_line[b]];
      Pn[b] += d.p[b] + ln.r * cur[b];
      Qn[b] += d.q[b] + ln.x * cur[b];
      Pn[parent[b]] += Pn[b];
      Qn[parent[b]] += Qn[b];
    }
    // Forward: voltages and currents from the sending end.
    Vec vn = v;
    Vec curn = cur;
    vn[root] = v0;
    for (std::size_t k = 1; k < order.size(); ++k) {
      const Index b = order[k];
      const Index a = parent[b];
      const Line& ln = net.lines()[parent_line[b]];
      curn[b] = (Pn[b] * Pn[b] + Qn[b] * Qn[b]) / vn[a];
      vn[b] = vn[a] - 2.0 * (ln.r * Pn[b] + ln.x * Qn[b]) + (ln.r * ln.r + ln.x * ln.x) * curn[b];
      if (!(vn[b] > 0.0) || !std::isfinite(vn[b]))
        throw NoConvergence("power flow diverged: voltage collapse at bus " +
                            std::to_string(net.buses()[b].id));
    }
    const double change = std::max({(vn - v).lpNorm<Eigen::Infinity>(),
                                    (curn - cur).lpNorm<Eigen::Infinity>(),
                                    (Pn - P).lpNorm<Eigen::Infinity>(),
                                    (Qn - Q).lpNorm<Eigen::Infinity>()});
    v = vn;
    cur = curn;
    P = Pn;
    Q = Qn;
    if (change <= opt.tol * (1.0 + v.lpNorm<Eigen::Infinity>())) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NoConvergence("power flow did not converge");

  const Layout lay(net, false);
  Vec z = Vec::Zero(lay.size());
  for (Index n = 0; n < nb; ++n) {
    z[lay.p_inj(n)] = -d.p[n];
    z[lay.q_inj(n)] = -d.q[n];
    z[lay.v(n)] = v[n];
  }
  double root_p = 0.0, root_q = 0.0;
  for (std::size_t k = 1; k < order.size(); ++k) {
    const Index b = order[k];
    const Index e = parent_line[b];
    const Line& ln = net.lines()[e];
    if (parent[b] == root) {
      root_p += P[b];
      root_q += Q[b];
    }
    z[lay.l(e)] = cur[b];
    if (net.from(e) == parent[b]) {
      z[lay.p(e)] = P[b];
      z[lay.q(e)] = Q[b];
    } else {
      // Data orientation is child -> parent: flow measured at the child end.
      z[lay.p(e)] = -(P[b] - ln.r * cur[b]);
      z[lay.q(e)] = -(Q[b] - ln.x * cur[b]);
    }
  }
  z[lay.p_inj(root)] = root_p;
  z[lay.q_inj(root)] = root_q;

  if (opt.check_limits) {
    for (Index n = 0; n < nb; ++n) {
      const Bus& b = net.buses()[n];
      const double slack = 1e-9;
      if (v[n] > b.v_max * b.v_max + slack || v[n] < b.v_min * b.v_min - slack)
        throw NoConvergence("power flow solution violates the voltage limits at bus " +
                            std::to_string(b.id));
    }
    for (Index e = 0; e < nl; ++e) {
      const Line& ln = net.lines()[e];
      if (std::abs(z[lay.p(e)]) > ln.p_max + 1e-9 || std::abs(z[lay.q(e)]) > ln.q_max + 1e-9)
        throw NoConvergence("power flow solution violates the flow limits of line " +
                            std::to_string(ln.id));
    }
  }
  return z;
}

}  // namespace dnr
