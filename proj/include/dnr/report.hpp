#pragma once

// JSON and text renderings of studies, certificates and points, plus point-file
// reading. Timings never enter the study JSON; they go to a separate document
// so that reports of identical runs compare byte for byte.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dnr/kkt.hpp"
#include "dnr/search.hpp"

namespace dnr {

using json = nlohmann::json;

inline json to_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline Vec vec_from_json(const json& a, const std::string& what) {
  if (!a.is_array()) throw ParseError(what + " must be an array of numbers");
  Vec v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw ParseError(what + " must be an array of numbers");
    v[static_cast<Index>(i)] = a[i].get<double>();
  }
  return v;
}

/// NaN and infinities become null.
inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json to_json(const Topology& t, const Network&) {
  return json{{"on_lines", t.on_lines}, {"u", t.u}};
}

inline Topology topology_from_json(const json& j, const Network& net) {
  if (!j.is_object() || !j.contains("on_lines") || !j["on_lines"].is_array())
    throw ParseError("topology must be an object with an on_lines array");
  std::vector<int> ids;
  for (const json& id : j["on_lines"]) {
    if (!id.is_number_integer()) throw ParseError("on_lines entries must be integer line ids");
    ids.push_back(id.get<int>());
  }
  return topology_from_lines(net, ids);
}

inline json to_json(const Multipliers& m) {
  json eq = json::object(), in = json::object();
  for (const RowBlock& b : m.blocks.equalities) eq[b.label] = to_json(m.lambda.segment(b.begin, b.size));
  for (const RowBlock& b : m.blocks.inequalities) in[b.label] = to_json(m.mu.segment(b.begin, b.size));
  return json{{"equality", eq}, {"inequality", in}};
}

/// Reads multipliers for the given block structure. Every block must be
/// present with the right length; unknown labels are rejected.
inline Multipliers multipliers_from_json(const json& j, const ConstraintBlocks& blocks) {
  Multipliers m = Multipliers::zeros(blocks);
  auto read = [&](const char* side, const std::vector<RowBlock>& list, Vec& target) {
    if (!j.contains(side) || !j[side].is_object())
      throw ParseError(std::string("multipliers need an object '") + side + "'");
    const json& obj = j[side];
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const RowBlock& b : list) known = known || b.label == it.key();
      if (!known) throw ParseError("unknown multiplier block '" + it.key() + "'");
    }
    for (const RowBlock& b : list) {
      if (!obj.contains(b.label)) throw ParseError("missing multiplier block '" + b.label + "'");
      const Vec v = vec_from_json(obj[b.label], "multiplier block " + b.label);
      if (v.size() != b.size)
        throw DimensionMismatch("multiplier block " + b.label + " has " + std::to_string(v.size()) +
                                " entries, expected " + std::to_string(b.size));
      target.segment(b.begin, b.size) = v;
    }
  };
  read("equality", blocks.equalities, m.lambda);
  read("inequality", blocks.inequalities, m.mu);
  return m;
}

inline json to_json(const KktReport& r) {
  return json{{"tol", r.tol},
              {"stationarity", r.stationarity},
              {"primal_equality", r.primal_equality},
              {"primal_inequality", r.primal_inequality},
              {"dual_min", r.dual_min},
              {"complementarity", r.complementarity},
              {"stationarity_ok", r.stationarity_ok},
              {"primal_equality_ok", r.primal_equality_ok},
              {"primal_inequality_ok", r.primal_inequality_ok},
              {"dual_ok", r.dual_ok},
              {"complementarity_ok", r.complementarity_ok},
              {"passed", r.passed()}};
}

inline json to_json(const CqReport& r) {
  json j{{"activity_tol", r.activity_tol},
         {"rank_tol", r.rank_tol},
         {"active", r.active},
         {"rows", r.rows},
         {"cols", r.cols},
         {"singular_values", r.singular_values},
         {"rank", r.rank},
         {"licq_holds", r.licq_holds},
         {"equality_rank", r.equality_rank},
         {"mfcq_equality_rank_ok", r.mfcq_eq_rank_ok},
         {"mfcq_direction_evaluated", r.mfcq_direction_evaluated},
         {"mfcq_direction_found", r.mfcq_direction_found},
         {"mfcq_lp_value", number_or_null(r.mfcq_lp_value)},
         {"mfcq_holds", r.mfcq_holds}};
  if (r.has_switch_block)
    j["line_state_block"] = json{{"rows", r.switch_block_rows},
                                 {"rank", r.switch_block_rank},
                                 {"witness_norm", r.witness_norm}};
  return j;
}

inline json to_json(const Certificate& c, const Network& net) {
  return json{{"topology", to_json(c.topology, net)},
              {"z", to_json(c.z)},
              {"multipliers", to_json(c.multipliers)},
              {"kkt", to_json(c.kkt)},
              {"cq", to_json(c.cq)},
              {"aux_cq", to_json(c.aux_cq)},
              {"nnls_residual", c.nnls_residual},
              {"feasibility", c.feasibility}};
}

inline json to_json(const DirectRecord& d, const Network& net) {
  json stages = json::array();
  for (const DirectStage& s : d.stages)
    stages.push_back(json{{"penalty", s.penalty},
                          {"status", to_string(s.status)},
                          {"objective", number_or_null(s.objective)},
                          {"losses", number_or_null(s.losses)},
                          {"iterations", s.iterations},
                          {"integrality_gap", s.integrality_gap}});
  return json{{"stages", stages},
              {"relaxed_u", to_json(d.relaxed_u)},
              {"rounded", to_json(d.rounded, net)},
              {"repaired", d.repaired},
              {"polish_status", to_string(d.polish_status)},
              {"polish_objective", number_or_null(d.polish_objective)},
              {"polish_iterations", d.polish_iterations}};
}

/// Full study without timings.
inline json to_json(const StudyResult& s, const Network& net) {
  json records = json::array();
  for (const TopologyRecord& r : s.records)
    records.push_back(json{{"index", r.index},
                           {"topology", to_json(r.topology, net)},
                           {"status", to_string(r.status)},
                           {"objective", number_or_null(r.objective)},
                           {"iterations", r.iterations},
                           {"kkt", to_json(r.aux_kkt)}});
  json j{{"network", s.network},
         {"records", records},
         {"best", s.best ? json(s.records[*s.best].index) : json(nullptr)},
         {"best_objective", number_or_null(s.best_objective)}};
  j["direct"] = s.direct ? to_json(*s.direct, net) : json(nullptr);
  j["certificate"] = s.certificate ? to_json(*s.certificate, net) : json(nullptr);
  return j;
}

inline json timings_json(const StudyResult& s) {
  json phases = json::array();
  double total = 0.0;
  for (const PhaseTiming& t : s.timings) {
    phases.push_back(json{{"phase", t.phase}, {"seconds", t.seconds}});
    total += t.seconds;
  }
  return json{{"network", s.network}, {"phases", phases}, {"total_seconds", total}};
}

namespace detail {

inline std::string sci(double x, int digits = 6) {
  if (!std::isfinite(x)) return "-";
  std::ostringstream o;
  o << std::scientific << std::setprecision(digits) << x;
  return o.str();
}

inline std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + ' ' : s + std::string(w - s.size(), ' ');
}

}  // namespace detail

/// Per-topology table: topology number, line states, objective, status, and
/// a closing line naming the optimum.
inline std::string render_topology_table(const StudyResult& s) {
  std::size_t uw = 10;
  for (const TopologyRecord& r : s.records) uw = std::max(uw, format_u(r.topology.u).size() + 2);
  std::ostringstream o;
  o << detail::pad("Topo.", 10) << detail::pad("Solution u", uw) << detail::pad("Objective", 16)
    << "Status\n";
  for (const TopologyRecord& r : s.records)
    o << detail::pad("Topo. " + std::to_string(r.index), 10) << detail::pad(format_u(r.topology.u), uw)
      << detail::pad(detail::sci(r.objective), 16) << to_string(r.status) << '\n';
  if (s.best)
    o << detail::pad("Opt.", 10) << detail::pad("Topo. " + std::to_string(s.records[*s.best].index), uw)
      << detail::sci(s.best_objective) << '\n';
  return o.str();
}

inline std::string render_timing_table(const StudyResult& s) {
  std::ostringstream o;
  o << detail::pad("Phase", 14) << "Time (s)\n";
  double total = 0.0;
  for (const PhaseTiming& t : s.timings) {
    std::ostringstream v;
    v << std::fixed << std::setprecision(4) << t.seconds;
    o << detail::pad(t.phase, 14) << v.str() << '\n';
    total += t.seconds;
  }
  std::ostringstream v;
  v << std::fixed << std::setprecision(4) << total;
  o << detail::pad("total", 14) << v.str() << '\n';
  return o.str();
}

inline std::string render_direct(const DirectRecord& d, const Network& net) {
  std::ostringstream o;
  o << detail::pad("Penalty", 10) << detail::pad("Status", 20) << detail::pad("Objective", 16)
    << detail::pad("Losses", 16) << detail::pad("Iter", 6) << "Integrality gap\n";
  for (const DirectStage& s : d.stages) {
    std::ostringstream rho;
    rho << s.penalty;
    o << detail::pad(rho.str(), 10) << detail::pad(to_string(s.status), 20)
      << detail::pad(detail::sci(s.objective), 16) << detail::pad(detail::sci(s.losses), 16)
      << detail::pad(std::to_string(s.iterations), 6) << detail::sci(s.integrality_gap, 2) << '\n';
  }
  o << "rounded topology  " << format_u(d.rounded.u) << (d.repaired ? "  (repaired)" : "") << '\n';
  o << "open lines        ";
  bool first = true;
  for (Index e = 0; e < net.num_lines(); ++e)
    if (!d.rounded.is_on(e)) {
      o << (first ? "" : ", ") << net.lines()[e].id;
      first = false;
    }
  o << '\n';
  o << "polish            " << to_string(d.polish_status) << ", objective "
    << detail::sci(d.polish_objective) << ", " << d.polish_iterations << " iterations\n";
  return o.str();
}

inline std::string render_certificate(const Certificate& c) {
  std::ostringstream o;
  o << "Reconfiguration program, lifted multipliers\n" << render(c.kkt);
  o << "Reconfiguration program\n" << render(c.cq);
  o << "Fixed-topology program\n" << render(c.aux_cq);
  o << "least-squares multiplier residual  " << detail::sci(c.nnls_residual, 3) << '\n';
  o << "feasibility                        " << detail::sci(c.feasibility, 3) << '\n';
  return o.str();
}

inline std::string render(const StudyResult& s, const Network& net) {
  std::ostringstream o;
  if (!s.records.empty() || !s.direct) o << render_topology_table(s);
  if (s.direct) o << render_direct(*s.direct, net);
  if (s.certificate) o << '\n' << render_certificate(*s.certificate);
  return o.str();
}

/// A point of either program with optional multipliers, as read from a file.
struct PointFile {
  std::string model;  // "dnr" or "aux"
  std::optional<Topology> topology;
  Vec z;
  std::optional<json> multipliers;  // parsed against the model's blocks later
};

inline json point_json(const std::string& model, const Vec& z, const Multipliers* mult,
                       const Topology* topology, const Network& net) {
  json j{{"model", model}, {"z", to_json(z)}};
  if (topology) j["topology"] = to_json(*topology, net);
  if (mult) j["multipliers"] = to_json(*mult);
  return j;
}

inline PointFile parse_point(const json& j, const Network& net) {
  if (!j.is_object()) throw ParseError("point file must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "model" && it.key() != "z" && it.key() != "topology" && it.key() != "multipliers")
      throw ParseError("unknown key '" + it.key() + "' in point file");
  PointFile p;
  p.model = j.value("model", std::string("dnr"));
  if (p.model != "dnr" && p.model != "aux") throw ParseError("model must be \"dnr\" or \"aux\"");
  if (!j.contains("z")) throw ParseError("point file needs a z array");
  p.z = vec_from_json(j["z"], "z");
  if (j.contains("topology")) p.topology = topology_from_json(j["topology"], net);
  if (p.model == "aux" && !p.topology) throw ParseError("an aux point needs its topology");
  if (j.contains("multipliers")) p.multipliers = j["multipliers"];
  return p;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path);
  f << text;
  if (!f) throw Error("cannot write " + path);
}

}  // namespace dnr
