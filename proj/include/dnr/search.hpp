#pragma once

// Solve strategies over the reconfiguration program:
//   solve_enumerate  every spanning tree solved as a fixed-topology program;
//   solve_direct     continuous relaxation with a penalty homotopy on u,
//                    rounding/repair to a spanning tree, fixed-topology polish.
// Both attach a multiplier certificate and a constraint-qualification
// diagnosis of the reconfiguration program at the reported point.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dnr/kkt.hpp"
#include "dnr/model_aux.hpp"
#include "dnr/model_dnr.hpp"
#include "dnr/nlp.hpp"
#include "dnr/powerflow.hpp"
#include "dnr/topology.hpp"

namespace dnr {

struct CertificateOptions {
  double tol = 1e-6;
  double activity_tol = kDefaultActivityTol;
  double rank_tol = kDefaultRankTol;
};

/// Everything known about one reported solution of the reconfiguration program.
struct Certificate {
  Topology topology;
  Vec z;                    // point of the reconfiguration program (u included)
  Multipliers multipliers;  // lifted from the fixed-topology multipliers
  KktReport kkt;            // reconfiguration program at (z, multipliers)
  CqReport cq;              // reconfiguration program: LICQ and MFCQ
  CqReport aux_cq;          // fixed-topology program at its optimum
  double nnls_residual = 0.0;
  double feasibility = 0.0;  // max(|g|_inf, max h)
};

struct TopologyRecord {
  int index = 0;  // 1-based position in the enumeration order
  Topology topology;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  KktReport aux_kkt;
  Vec z;  // fixed-topology point
  Multipliers multipliers;
};

struct DirectStage {
  double penalty = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double losses = 0.0;
  int iterations = 0;
  double integrality_gap = 0.0;  // max_e min(u_e, 1 - u_e)
};

struct DirectRecord {
  std::vector<DirectStage> stages;
  Vec relaxed_u;
  Topology rounded;
  bool repaired = false;
  SolveStatus polish_status = SolveStatus::NumericalFailure;
  double polish_objective = std::numeric_limits<double>::quiet_NaN();
  int polish_iterations = 0;
};

struct PhaseTiming {
  std::string phase;
  double seconds = 0.0;
};

struct StudyResult {
  std::string network;
  std::vector<TopologyRecord> records;
  std::optional<std::size_t> best;  // index into records
  double best_objective = std::numeric_limits<double>::quiet_NaN();
  std::optional<DirectRecord> direct;
  std::optional<Certificate> certificate;
  std::vector<PhaseTiming> timings;
};

struct EnumerateOptions {
  long long cap = kDefaultEnumerationCap;
  unsigned threads = 1;
  SolverOptions solver;
  CertificateOptions certificate;
  bool attach_certificate = true;
};

struct DirectOptions {
  std::vector<double> penalty_schedule{0.0, 1.0, 10.0, 100.0};
  double round_threshold = 0.5;
  SolverOptions solver;
  CertificateOptions certificate;
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - start_).count();
    start_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Flows zero, voltages mid-box, root injection covering the total load.
inline Vec flat_start(const Network& net, const Layout& lay, const LoadVector& d) {
  Vec z = Vec::Zero(lay.size());
  for (Index n = 0; n < net.num_buses(); ++n) {
    const Bus& b = net.buses()[n];
    z[lay.v(n)] = 0.5 * (b.v_min * b.v_min + b.v_max * b.v_max);
    z[lay.p_inj(n)] = -d.p[n];
    z[lay.q_inj(n)] = -d.q[n];
  }
  z[lay.p_inj(net.root())] = d.p.sum() - d.p[net.root()];
  z[lay.q_inj(net.root())] = d.q.sum() - d.q[net.root()];
  return z;
}

inline double feasibility(const Vec& g, const Vec& h) {
  double f = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  if (h.size()) f = std::max(f, h.maxCoeff());
  return std::max(f, 0.0);
}

inline SolveResult solve_aux(const AuxModel& aux, const SolverOptions& opt) {
  Vec z0;
  try {
    z0 = power_flow_oracle(aux.network(), aux.topology(), aux.loads());
  } catch (const NoConvergence&) {
    z0 = flat_start(aux.network(), aux.layout(), aux.loads());
  }
  return solve(make_problem(aux, z0), opt);
}

}  // namespace detail

/// Certificate for a fixed-topology optimum: lifted multipliers, KKT check on
/// the reconfiguration program, LICQ/MFCQ on both programs, NNLS cross-check.
inline Certificate certify(const AuxModel& aux, const Vec& z_aux, const Multipliers& aux_mult,
                           const CertificateOptions& opt = {}) {
  Certificate c;
  c.topology = aux.topology();
  c.z = embed(z_aux, aux.topology());
  const DnrModel dnr(aux.network(), aux.loads());
  c.multipliers = lift_multipliers(aux, z_aux, aux_mult, opt.tol);
  c.kkt = check_kkt(dnr, c.z, c.multipliers, opt.tol);
  c.cq = check_mfcq(dnr, c.z, opt.activity_tol, opt.rank_tol);
  c.aux_cq = check_mfcq(aux, z_aux, opt.activity_tol, opt.rank_tol);
  c.nnls_residual = recover_multipliers_least_squares(dnr, c.z, opt.activity_tol).residual;
  c.feasibility = detail::feasibility(dnr.equalities(c.z), dnr.inequalities(c.z));
  return c;
}

/// Solves the fixed-topology program for every spanning tree and ranks them.
inline StudyResult solve_enumerate(const Network& net, const EnumerateOptions& opt = {}) {
  StudyResult study;
  detail::Stopwatch clock;
  const std::vector<Topology> trees = enumerate_radial(net, opt.cap);
  study.timings.push_back({"enumerate", clock.lap()});

  study.records.resize(trees.size());
  std::vector<std::string> errors(trees.size());
  auto work = [&](std::size_t k) {
    TopologyRecord& rec = study.records[k];
    rec.index = static_cast<int>(k) + 1;
    rec.topology = trees[k];
    try {
      const AuxModel aux(net, trees[k]);
      const SolveResult res = detail::solve_aux(aux, opt.solver);
      rec.status = res.status;
      rec.objective = res.objective;
      rec.iterations = res.iterations;
      rec.z = res.z;
      rec.multipliers = multipliers_from(aux, res);
      rec.aux_kkt = check_kkt(aux, res.z, rec.multipliers, opt.certificate.tol);
    } catch (const std::exception& e) {
      errors[k] = e.what();
      rec.status = SolveStatus::NumericalFailure;
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, trees.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < trees.size(); ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < trees.size(); k = next++) work(k);
      });
    for (auto& th : pool) th.join();
  }
  study.timings.push_back({"solve", clock.lap()});

  for (std::size_t k = 0; k < study.records.size(); ++k) {
    const TopologyRecord& rec = study.records[k];
    if (rec.status != SolveStatus::Optimal) continue;
    if (!study.best || rec.objective < study.best_objective) {
      study.best = k;
      study.best_objective = rec.objective;
    }
  }
  if (!study.best) throw NoConvergence("no topology solved to optimality");

  if (opt.attach_certificate) {
    const TopologyRecord& rec = study.records[*study.best];
    const AuxModel aux(net, rec.topology);
    study.certificate = certify(aux, rec.z, rec.multipliers, opt.certificate);
  }
  study.timings.push_back({"certificate", clock.lap()});
  return study;
}

/// Continuous solve of the reconfiguration program: relaxation with penalty
/// homotopy, rounding and spanning-tree repair, fixed-topology polish.
inline StudyResult solve_direct(const Network& net, const DirectOptions& opt = {}) {
  StudyResult study;
  DirectRecord rec;
  detail::Stopwatch clock;
  const LoadVector loads = net.nominal_loads();
  const Layout lay(net, true);

  // Bridges are on in every spanning tree; their states are fixed at 1. The
  // remaining states start at the value that satisfies the line count.
  const std::vector<Index> bridges = bridge_lines(net);
  std::vector<char> is_bridge(static_cast<std::size_t>(net.num_lines()), 0);
  for (Index e : bridges) is_bridge[e] = 1;
  const Index nb_free = net.num_lines() - static_cast<Index>(bridges.size());
  const double u0 = nb_free > 0 ? static_cast<double>(net.num_buses() - 1 - bridges.size()) /
                                      static_cast<double>(nb_free)
                                : 1.0;
  Vec z = detail::flat_start(net, lay, loads);
  for (Index e = 0; e < net.num_lines(); ++e) z[lay.u(e)] = is_bridge[e] ? 1.0 : u0;
  for (double rho : opt.penalty_schedule) {
    DnrOptions mopt;
    mopt.binary_equality = false;
    mopt.penalty = rho;
    mopt.solver_box = true;
    const DnrModel relaxed(net, loads, mopt);
    NlpProblem problem = make_problem(relaxed, z);
    for (Index e : bridges) problem.lower[lay.u(e)] = 1.0;
    const SolveResult res = solve(problem, opt.solver);
    DirectStage st;
    st.penalty = rho;
    st.status = res.status;
    st.objective = res.objective;
    st.losses = relaxed.losses(res.z);
    st.iterations = res.iterations;
    for (Index e = 0; e < net.num_lines(); ++e) {
      const double u = res.z[lay.u(e)];
      st.integrality_gap = std::max(st.integrality_gap, std::min(u, 1.0 - u));
    }
    rec.stages.push_back(st);
    // A stage only provides the warm start of the next one; an unconverged
    // stage is recorded and the run continues while its point is feasible.
    if (!res.z.allFinite() || res.status == SolveStatus::Infeasible ||
        res.residuals.feasibility > 1e3 * opt.solver.tol_feas) {
      std::ostringstream s;
      s << "relaxation stage with penalty " << rho << " ended with status " << to_string(res.status);
      throw NoConvergence(s.str());
    }
    z = res.z;
  }
  study.timings.push_back({"relax", clock.lap()});

  rec.relaxed_u = z.segment(lay.u(0), net.num_lines());
  std::vector<int> u(static_cast<std::size_t>(net.num_lines()));
  for (Index e = 0; e < net.num_lines(); ++e) u[e] = rec.relaxed_u[e] >= opt.round_threshold ? 1 : 0;
  if (is_radial(net, u)) {
    rec.rounded = topology_of(net, u);
  } else {
    std::vector<double> w(rec.relaxed_u.data(), rec.relaxed_u.data() + rec.relaxed_u.size());
    rec.rounded = max_weight_spanning_tree(net, w);
    rec.repaired = true;
  }
  study.timings.push_back({"round", clock.lap()});

  const AuxModel aux(net, rec.rounded, loads);
  const SolveResult res = detail::solve_aux(aux, opt.solver);
  rec.polish_status = res.status;
  rec.polish_objective = res.objective;
  rec.polish_iterations = res.iterations;
  if (res.status != SolveStatus::Optimal)
    throw NoConvergence(std::string("polish solve ended with status ") + to_string(res.status));
  study.timings.push_back({"polish", clock.lap()});

  study.certificate = certify(aux, res.z, multipliers_from(aux, res), opt.certificate);
  study.timings.push_back({"certificate", clock.lap()});
  study.direct = std::move(rec);
  return study;
}

}  // namespace dnr
