#pragma once

#include <string>
#include <vector>

#include "dnr/network.hpp"

namespace dnr {

/// Position of each variable block in the stacked decision vector
///   z = (p_inj, q_inj, p_flow, q_flow, l, v[, u]).
/// The full reconfiguration model carries u; the fixed-topology model does not.
struct Layout {
  Index buses = 0;
  Index lines = 0;
  bool with_u = true;

  Layout() = default;
  Layout(Index n, Index l, bool u) : buses(n), lines(l), with_u(u) {}
  Layout(const Network& net, bool u) : Layout(net.num_buses(), net.num_lines(), u) {}

  Index size() const { return 3 * buses + (with_u ? 4 : 3) * lines; }
  Index p_inj(Index n) const { return n; }
  Index q_inj(Index n) const { return buses + n; }
  Index p(Index e) const { return 2 * buses + e; }
  Index q(Index e) const { return 2 * buses + lines + e; }
  Index l(Index e) const { return 2 * buses + 2 * lines + e; }
  Index v(Index n) const { return 2 * buses + 3 * lines + n; }
  Index u(Index e) const { return 3 * buses + 3 * lines + e; }
};

/// Named view of a decision vector.
struct PrimalPoint {
  Vec p_inj;
  Vec q_inj;
  Vec p_flow;
  Vec q_flow;
  Vec l;
  Vec v;
  Vec u;  // empty for fixed-topology points

  static PrimalPoint zeros(Index buses, Index lines, bool with_u) {
    PrimalPoint z;
    z.p_inj = Vec::Zero(buses);
    z.q_inj = Vec::Zero(buses);
    z.p_flow = Vec::Zero(lines);
    z.q_flow = Vec::Zero(lines);
    z.l = Vec::Zero(lines);
    z.v = Vec::Zero(buses);
    z.u = with_u ? Vec::Zero(lines) : Vec();
    return z;
  }

  Layout layout() const { return Layout(p_inj.size(), p_flow.size(), u.size() > 0); }

  Vec to_vector() const {
    const Layout lay = layout();
    Vec z(lay.size());
    const Index n = lay.buses;
    const Index m = lay.lines;
    z.segment(lay.p_inj(0), n) = p_inj;
    z.segment(lay.q_inj(0), n) = q_inj;
    z.segment(lay.p(0), m) = p_flow;
    z.segment(lay.q(0), m) = q_flow;
    z.segment(lay.l(0), m) = l;
    z.segment(lay.v(0), n) = v;
    if (lay.with_u) z.segment(lay.u(0), m) = u;
    return z;
  }

  static PrimalPoint from_vector(const Vec& z, const Layout& lay) {
    if (z.size() != lay.size())
      throw DimensionMismatch("point has " + std::to_string(z.size()) + " entries, expected " +
                              std::to_string(lay.size()));
    PrimalPoint pt;
    const Index n = lay.buses;
    const Index m = lay.lines;
    pt.p_inj = z.segment(lay.p_inj(0), n);
    pt.q_inj = z.segment(lay.q_inj(0), n);
    pt.p_flow = z.segment(lay.p(0), m);
    pt.q_flow = z.segment(lay.q(0), m);
    pt.l = z.segment(lay.l(0), m);
    pt.v = z.segment(lay.v(0), n);
    if (lay.with_u) pt.u = z.segment(lay.u(0), m);
    return pt;
  }
};

/// Contiguous row range of one constraint family.
struct RowBlock {
  std::string label;
  Index begin = 0;
  Index size = 0;
  Index end() const { return begin + size; }
};

/// Row labelling of the equality (g = 0) and inequality (h <= 0) blocks.
struct ConstraintBlocks {
  std::vector<RowBlock> equalities;
  std::vector<RowBlock> inequalities;

  Index num_equalities() const {
    return equalities.empty() ? 0 : equalities.back().end();
  }
  Index num_inequalities() const {
    return inequalities.empty() ? 0 : inequalities.back().end();
  }

  bool has_equality(const std::string& label) const { return contains(equalities, label); }
  bool has_inequality(const std::string& label) const { return contains(inequalities, label); }
  const RowBlock& equality(const std::string& label) const { return find(equalities, label); }
  const RowBlock& inequality(const std::string& label) const { return find(inequalities, label); }

  static std::string label_of(const std::vector<RowBlock>& blocks, Index row) {
    for (const auto& b : blocks)
      if (row >= b.begin && row < b.end()) return b.label;
    return {};
  }

  void add_equality(std::string label, Index size) { append(equalities, std::move(label), size); }
  void add_inequality(std::string label, Index size) {
    append(inequalities, std::move(label), size);
  }

 private:
  static bool contains(const std::vector<RowBlock>& blocks, const std::string& label) {
    for (const auto& b : blocks)
      if (b.label == label) return true;
    return false;
  }
  static const RowBlock& find(const std::vector<RowBlock>& blocks, const std::string& label) {
    for (const auto& b : blocks)
      if (b.label == label) return b;
    throw DimensionMismatch("no constraint block labelled " + label);
  }
  static void append(std::vector<RowBlock>& blocks, std::string label, Index size) {
    const Index begin = blocks.empty() ? 0 : blocks.back().end();
    blocks.push_back({std::move(label), begin, size});
  }
};

namespace detail {

inline void check_dimension(const Vec& z, Index expected) {
  if (z.size() != expected)
    throw DimensionMismatch("point has " + std::to_string(z.size()) + " entries, expected " +
                            std::to_string(expected));
}

}  // namespace detail

}  // namespace dnr
