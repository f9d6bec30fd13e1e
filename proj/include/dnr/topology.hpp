#pragma once

// Radial configurations: spanning trees of the line graph and the binary line
// state vector that selects them.

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dnr/network.hpp"

namespace dnr {

/// A spanning tree of the network. `u` is the line-state vector in network
/// line order; `on_lines` lists the ids of switched-on lines in the same order.
struct Topology {
  std::vector<int> on_lines;
  std::vector<int> u;

  bool is_on(Index e) const { return u[static_cast<std::size_t>(e)] == 1; }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// "[1, 1, 0, 1]"
inline std::string format_u(const std::vector<int>& u) {
  std::ostringstream s;
  s << '[';
  for (std::size_t i = 0; i < u.size(); ++i) s << (i ? ", " : "") << u[i];
  s << ']';
  return s.str();
}

namespace detail {

inline void check_u(const Network& net, const std::vector<int>& u) {
  if (static_cast<Index>(u.size()) != net.num_lines())
    throw DimensionMismatch("u has " + std::to_string(u.size()) + " entries, network has " +
                            std::to_string(net.num_lines()) + " lines");
  for (int b : u)
    if (b != 0 && b != 1) throw DimensionMismatch("u entries must be 0 or 1");
}

}  // namespace detail

/// Degree test (every bus touches an on-line) and count test (|N|-1 lines on),
/// reported separately. Together they do not imply a spanning tree.
struct RadialityChecks {
  bool degree_ok = false;
  bool count_ok = false;
};

inline RadialityChecks check_degree_count_radiality(const Network& net, const std::vector<int>& u) {
  detail::check_u(net, u);
  RadialityChecks out;
  out.degree_ok = true;
  for (Index n = 0; n < net.num_buses(); ++n) {
    int incident = 0;
    for (Index e : net.inflow(n)) incident += u[e];
    for (Index e : net.outflow(n)) incident += u[e];
    out.degree_ok = out.degree_ok && incident >= 1;
  }
  const int on = std::accumulate(u.begin(), u.end(), 0);
  out.count_ok = on == net.num_buses() - 1;
  return out;
}

/// True iff the switched-on lines form a spanning tree.
inline bool is_radial(const Network& net, const std::vector<int>& u) {
  detail::check_u(net, u);
  const int on = std::accumulate(u.begin(), u.end(), 0);
  if (on != net.num_buses() - 1) return false;
  detail::DisjointSets sets(net.num_buses());
  for (Index e = 0; e < net.num_lines(); ++e)
    if (u[e] == 1 && !sets.unite(net.from(e), net.to(e))) return false;
  return true;
}

inline Topology topology_of(const Network& net, const std::vector<int>& u) {
  if (!is_radial(net, u)) throw NotRadial("u = " + format_u(u) + " is not a spanning tree");
  Topology t;
  t.u = u;
  for (Index e = 0; e < net.num_lines(); ++e)
    if (u[e] == 1) t.on_lines.push_back(net.lines()[e].id);
  return t;
}

inline std::vector<int> u_of(const Network& net, const Topology& topology) {
  std::vector<int> u(static_cast<std::size_t>(net.num_lines()), 0);
  for (int id : topology.on_lines) u[net.line_index(id)] = 1;
  if (!is_radial(net, u)) throw NotRadial("topology is not a spanning tree");
  return u;
}

/// Topology from a list of switched-on line ids.
inline Topology topology_from_lines(const Network& net, const std::vector<int>& on_ids) {
  std::vector<int> u(static_cast<std::size_t>(net.num_lines()), 0);
  for (int id : on_ids) u[net.line_index(id)] = 1;
  return topology_of(net, u);
}

/// Lines whose removal disconnects the network. They belong to every
/// spanning tree.
inline std::vector<Index> bridge_lines(const Network& net) {
  std::vector<Index> out;
  for (Index cut = 0; cut < net.num_lines(); ++cut) {
    detail::DisjointSets sets(net.num_buses());
    Index parts = net.num_buses();
    for (Index e = 0; e < net.num_lines(); ++e)
      if (e != cut && sets.unite(net.from(e), net.to(e))) --parts;
    if (parts > 1) out.push_back(cut);
  }
  return out;
}

inline constexpr long long kDefaultEnumerationCap = 100000;

/// Every spanning tree of the line graph, in descending lexicographic order of
/// the u-vector. Throws CapExceeded once more than `cap` trees are found.
inline std::vector<Topology> enumerate_radial(const Network& net,
                                              long long cap = kDefaultEnumerationCap) {
  if (!net.connected()) throw DisconnectedGraph(kDisconnectedMessage);
  const Index nb = net.num_buses();
  const Index nl = net.num_lines();
  std::vector<Topology> out;
  std::vector<int> u(static_cast<std::size_t>(nl), 0);

  // Whether the buses stay connected using chosen lines plus lines >= next.
  auto still_connected = [&](Index next) {
    detail::DisjointSets sets(nb);
    Index comps = nb;
    for (Index e = 0; e < nl; ++e)
      if ((e < next && u[e] == 1) || e >= next)
        if (sets.unite(net.from(e), net.to(e))) --comps;
    return comps == 1;
  };
  auto acyclic_with = [&](Index cand) {
    detail::DisjointSets sets(nb);
    for (Index e = 0; e < cand; ++e)
      if (u[e] == 1) sets.unite(net.from(e), net.to(e));
    return sets.find(net.from(cand)) != sets.find(net.to(cand));
  };

  auto recurse = [&](auto&& self, Index e, Index chosen) -> void {
    if (chosen == nb - 1) {
      std::fill(u.begin() + e, u.end(), 0);
      if (static_cast<long long>(out.size()) >= cap)
        throw CapExceeded("more than " + std::to_string(cap) + " spanning trees", cap + 1);
      out.push_back(topology_of(net, u));
      return;
    }
    if (e == nl) return;
    if (acyclic_with(e)) {
      u[e] = 1;
      self(self, e + 1, chosen + 1);
    }
    u[e] = 0;
    if (still_connected(e + 1)) self(self, e + 1, chosen);
  };
  recurse(recurse, 0, 0);
  return out;
}

/// Spanning tree preferring larger weights (Kruskal, ties broken by line order).
inline Topology max_weight_spanning_tree(const Network& net, const std::vector<double>& weight) {
  if (static_cast<Index>(weight.size()) != net.num_lines())
    throw DimensionMismatch("weight vector length differs from line count");
  std::vector<Index> order(static_cast<std::size_t>(net.num_lines()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return weight[a] > weight[b]; });
  detail::DisjointSets sets(net.num_buses());
  std::vector<int> u(static_cast<std::size_t>(net.num_lines()), 0);
  for (Index e : order)
    if (sets.unite(net.from(e), net.to(e))) u[e] = 1;
  return topology_of(net, u);
}

}  // namespace dnr
