#pragma once

// Random feasible points of the reconfiguration program: a spanning tree, a
// load vector scaled per bus by a factor in [1 - spread, 1 + spread], a root
// voltage inside its box, and the tree's power-flow solution.

#include <random>
#include <vector>

#include "dnr/model_aux.hpp"
#include "dnr/powerflow.hpp"
#include "dnr/topology.hpp"

namespace dnr {

struct SampledPoint {
  LoadVector loads;
  Topology topology;
  Vec z;  // reconfiguration layout, u included
};

inline LoadVector perturb_loads(const Network& net, double spread, std::mt19937_64& rng) {
  LoadVector d = net.nominal_loads();
  std::uniform_real_distribution<double> factor(1.0 - spread, 1.0 + spread);
  for (Index n = 0; n < net.num_buses(); ++n) {
    d.p[n] *= factor(rng);
    d.q[n] *= factor(rng);
  }
  return d;
}

/// Draws `count` points, cycling through the spanning trees. Draws whose power
/// flow fails or violates a limit are redrawn, up to 20 times per point.
inline std::vector<SampledPoint> sample_feasible_points(const Network& net, int count,
                                                        std::uint64_t seed, double spread = 0.1,
                                                        long long cap = kDefaultEnumerationCap) {
  const std::vector<Topology> trees = enumerate_radial(net, cap);
  std::mt19937_64 rng(seed);
  const Bus& root = net.buses()[net.root()];
  std::uniform_real_distribution<double> root_v(root.v_min * root.v_min, root.v_max * root.v_max);
  std::vector<SampledPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const Topology& t = trees[static_cast<std::size_t>(k) % trees.size()];
    for (int attempt = 0; attempt < 20; ++attempt) {
      SampledPoint s;
      s.loads = perturb_loads(net, spread, rng);
      s.topology = t;
      PowerFlowOptions opt;
      opt.root_v = root_v(rng);
      try {
        s.z = embed(power_flow_oracle(net, t, s.loads, opt), t);
      } catch (const NoConvergence&) {
        continue;
      }
      out.push_back(std::move(s));
      break;
    }
  }
  if (static_cast<int>(out.size()) < count)
    throw NoConvergence("could not draw enough feasible points; loads may be too heavy");
  return out;
}

}  // namespace dnr
