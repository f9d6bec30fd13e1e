#pragma once

// Command-line front end. run() never throws: exit code 0 on success, 1 on
// domain errors (infeasible, cap exceeded, bad file contents, failed solves),
// 2 on usage errors (unknown flags, missing files). Reports go to stdout and
// the --out directory, diagnostics to stderr.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dnr/kkt.hpp"
#include "dnr/report.hpp"
#include "dnr/sampling.hpp"
#include "dnr/search.hpp"

namespace dnr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string network;
  std::string out;
  std::string format = "text";
  double tol = 1e-6;
  double activity_tol = kDefaultActivityTol;
  double rank_tol = kDefaultRankTol;
};

inline std::vector<double> parse_csv_numbers(const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(item, &used);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--penalty-schedule", "'" + item + "' is not a number");
    }
    if (used != item.size()) throw CLI::ValidationError("--penalty-schedule", "'" + item + "' is not a number");
    v.push_back(x);
  }
  if (v.empty()) throw CLI::ValidationError("--penalty-schedule", "empty schedule");
  return v;
}

inline std::vector<int> parse_u(const std::string& csv, const Network& net) {
  std::vector<int> u;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item != "0" && item != "1") throw ValidationError("--topology entries must be 0 or 1");
    u.push_back(item == "1" ? 1 : 0);
  }
  if (static_cast<Index>(u.size()) != net.num_lines())
    throw DimensionMismatch("--topology has " + std::to_string(u.size()) + " entries, network has " +
                            std::to_string(net.num_lines()) + " lines");
  return u;
}

inline std::string network_name(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

inline void add_common(CLI::App* sub, CommonArgs& a, bool tolerances) {
  sub->add_option("--network", a.network, "network file (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--format", a.format, "stdout format")->check(CLI::IsMember({"text", "json"}));
  if (tolerances) {
    sub->add_option("--tol", a.tol, "KKT tolerance");
    sub->add_option("--activity-tol", a.activity_tol, "activity tolerance (relative to 1 + |z|_inf)");
    sub->add_option("--rank-tol", a.rank_tol, "rank threshold relative to the largest singular value");
  }
}

inline void write_study(const StudyResult& study, const Network& net, const std::string& dir,
                        const std::string& text) {
  if (dir.empty()) return;
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  write_text_file((d / "study.json").string(), to_json(study, net).dump(2) + "\n");
  write_text_file((d / "timings.json").string(), timings_json(study).dump(2) + "\n");
  write_text_file((d / "report.txt").string(), text + "\n" + render_timing_table(study));
  if (study.certificate) {
    const Certificate& c = *study.certificate;
    write_text_file((d / "solution.json").string(),
                    point_json("dnr", c.z, &c.multipliers, &c.topology, net).dump(2) + "\n");
  }
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Distribution network reconfiguration: solves and optimality certificates"};
  app.name("dnr");
  app.require_subcommand(1);

  CommonArgs enum_args;
  long long cap = kDefaultEnumerationCap;
  unsigned threads = 1;
  auto* enum_cmd = app.add_subcommand("solve-enumerate", "solve every spanning tree and rank them");
  add_common(enum_cmd, enum_args, true);
  enum_cmd->add_option("--out", enum_args.out, "output directory");
  enum_cmd->add_option("--cap", cap, "largest number of spanning trees to enumerate");
  enum_cmd->add_option("--threads", threads, "concurrent fixed-topology solves");

  CommonArgs direct_args;
  std::string schedule = "0,1,10,100";
  double threshold = 0.5;
  auto* direct_cmd = app.add_subcommand("solve-direct", "relax, round and polish");
  add_common(direct_cmd, direct_args, true);
  direct_cmd->add_option("--out", direct_args.out, "output directory");
  direct_cmd->add_option("--penalty-schedule", schedule, "comma-separated penalty weights");
  direct_cmd->add_option("--round-threshold", threshold, "line-state rounding threshold");

  CommonArgs kkt_args;
  std::string kkt_point;
  auto* kkt_cmd = app.add_subcommand("check-kkt", "check the KKT conditions at a point file");
  add_common(kkt_cmd, kkt_args, true);
  kkt_cmd->add_option("--point", kkt_point, "point file (JSON)")->required()->check(CLI::ExistingFile);

  CommonArgs cq_args;
  std::string cq_point;
  std::uint64_t seed = 0;
  int samples = 100;
  auto* cq_cmd = app.add_subcommand("check-cq", "LICQ and MFCQ at a point, or at sampled points");
  add_common(cq_cmd, cq_args, true);
  auto* cq_point_opt = cq_cmd->add_option("--point", cq_point, "point file (JSON)")->check(CLI::ExistingFile);
  auto* seed_opt = cq_cmd->add_option("--seed", seed, "seed of the sampled study");
  cq_cmd->add_option("--samples", samples, "number of sampled points")->check(CLI::PositiveNumber);
  cq_point_opt->excludes(seed_opt);

  CommonArgs pf_args;
  std::string pf_topology;
  double root_v = 0.0;
  auto* pf_cmd = app.add_subcommand("power-flow", "radial power flow for one topology");
  add_common(pf_cmd, pf_args, false);
  pf_cmd->add_option("--topology", pf_topology, "line states, e.g. 1,1,0,1")->required();
  auto* root_v_opt = pf_cmd->add_option("--root-v", root_v, "root voltage magnitude (p.u.)")
                         ->check(CLI::PositiveNumber);
  pf_cmd->add_option("--out", pf_args.out, "output directory");

  CommonArgs val_args;
  auto* val_cmd = app.add_subcommand("validate", "check a network file");
  add_common(val_cmd, val_args, false);
  val_cmd->add_option("--cap", cap, "largest number of spanning trees to count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands())
      if (sub->parsed()) failed = sub;
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (enum_cmd->parsed()) {
      const Network net = load_network(enum_args.network);
      EnumerateOptions opt;
      opt.cap = cap;
      opt.threads = threads;
      opt.certificate = {enum_args.tol, enum_args.activity_tol, enum_args.rank_tol};
      StudyResult study = solve_enumerate(net, opt);
      study.network = network_name(enum_args.network);
      const std::string text = render(study, net);
      if (enum_args.format == "json") out << to_json(study, net).dump(2) << '\n';
      else out << text;
      write_study(study, net, enum_args.out, text);
      return kExitOk;
    }
    if (direct_cmd->parsed()) {
      const Network net = load_network(direct_args.network);
      DirectOptions opt;
      try {
        opt.penalty_schedule = parse_csv_numbers(schedule);
      } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
      }
      opt.round_threshold = threshold;
      opt.certificate = {direct_args.tol, direct_args.activity_tol, direct_args.rank_tol};
      StudyResult study = solve_direct(net, opt);
      study.network = network_name(direct_args.network);
      const std::string text = render(study, net);
      if (direct_args.format == "json") out << to_json(study, net).dump(2) << '\n';
      else out << text;
      write_study(study, net, direct_args.out, text);
      return kExitOk;
    }
    if (kkt_cmd->parsed()) {
      const Network net = load_network(kkt_args.network);
      const PointFile p = parse_point(read_json_file(kkt_point), net);
      auto check = [&](const auto& model) {
        Multipliers m;
        bool recovered = false;
        if (p.multipliers) {
          m = multipliers_from_json(*p.multipliers, model.blocks());
        } else {
          m = recover_multipliers_least_squares(model, p.z, kkt_args.activity_tol).multipliers;
          recovered = true;
        }
        const KktReport r = check_kkt(model, p.z, m, kkt_args.tol);
        if (kkt_args.format == "json") {
          out << json{{"model", p.model}, {"multipliers_recovered", recovered}, {"kkt", to_json(r)}}.dump(2)
              << '\n';
        } else {
          if (recovered) out << "no multipliers in the point file; least-squares estimate used\n";
          out << render(r);
        }
      };
      if (p.model == "aux") check(AuxModel(net, *p.topology));
      else check(DnrModel(net));
      return kExitOk;
    }
    if (cq_cmd->parsed()) {
      const Network net = load_network(cq_args.network);
      if (!cq_point.empty()) {
        const PointFile p = parse_point(read_json_file(cq_point), net);
        const CqReport r = p.model == "aux"
                               ? check_mfcq(AuxModel(net, *p.topology), p.z, cq_args.activity_tol, cq_args.rank_tol)
                               : check_mfcq(DnrModel(net), p.z, cq_args.activity_tol, cq_args.rank_tol);
        if (cq_args.format == "json") out << json{{"model", p.model}, {"cq", to_json(r)}}.dump(2) << '\n';
        else out << render(r);
        return kExitOk;
      }
      // Sampled study: the reconfiguration program at random feasible points,
      // and the fixed-topology program at its optimum for the same loads.
      const std::vector<SampledPoint> pts = sample_feasible_points(net, samples, seed);
      int licq_fail = 0, mfcq_fail = 0, aux_licq = 0, aux_solved = 0;
      double worst_witness = 0.0;
      for (const SampledPoint& s : pts) {
        const CqReport r = check_mfcq(DnrModel(net, s.loads), s.z, cq_args.activity_tol, cq_args.rank_tol);
        licq_fail += r.licq_holds ? 0 : 1;
        mfcq_fail += r.mfcq_holds ? 0 : 1;
        worst_witness = std::max(worst_witness, r.witness_norm);
        const AuxModel aux(net, s.topology, s.loads);
        const SolveResult res = detail::solve_aux(aux, SolverOptions{});
        if (res.status != SolveStatus::Optimal) continue;
        ++aux_solved;
        aux_licq += check_licq(aux, res.z, cq_args.activity_tol, cq_args.rank_tol).licq_holds ? 1 : 0;
      }
      const json j{{"network", network_name(cq_args.network)},
                   {"seed", seed},
                   {"samples", samples},
                   {"reconfiguration_licq_failures", licq_fail},
                   {"reconfiguration_mfcq_failures", mfcq_fail},
                   {"worst_witness_norm", worst_witness},
                   {"fixed_topology_optima", aux_solved},
                   {"fixed_topology_licq_holds", aux_licq}};
      if (cq_args.format == "json") {
        out << j.dump(2) << '\n';
      } else {
        out << "sampled points                          " << samples << " (seed " << seed << ")\n";
        out << "reconfiguration program, LICQ fails     " << licq_fail << '\n';
        out << "reconfiguration program, MFCQ fails     " << mfcq_fail << '\n';
        out << "largest null-combination residual       " << detail::sci(worst_witness, 3) << '\n';
        out << "fixed-topology optima                   " << aux_solved << '\n';
        out << "fixed-topology optima with LICQ         " << aux_licq << '\n';
      }
      return kExitOk;
    }
    if (pf_cmd->parsed()) {
      const Network net = load_network(pf_args.network);
      const Topology t = topology_of(net, parse_u(pf_topology, net));
      PowerFlowOptions opt;
      if (root_v_opt->count()) opt.root_v = root_v * root_v;
      const Vec z = power_flow_oracle(net, t, net.nominal_loads(), opt);
      const Layout lay(net, false);
      if (pf_args.format == "json") {
        out << point_json("aux", z, nullptr, &t, net).dump(2) << '\n';
      } else {
        out << detail::pad("Bus", 6) << "|V| (p.u.)\n";
        for (Index n = 0; n < net.num_buses(); ++n) {
          std::ostringstream v;
          v << std::fixed << std::setprecision(6) << std::sqrt(z[lay.v(n)]);
          out << detail::pad(std::to_string(net.buses()[n].id), 6) << v.str() << '\n';
        }
        out << detail::pad("Line", 6) << detail::pad("P", 16) << detail::pad("Q", 16) << "|I|^2\n";
        for (Index e = 0; e < net.num_lines(); ++e)
          out << detail::pad(std::to_string(net.lines()[e].id), 6) << detail::pad(detail::sci(z[lay.p(e)]), 16)
              << detail::pad(detail::sci(z[lay.q(e)]), 16) << detail::sci(z[lay.l(e)]) << '\n';
        double loss = 0.0;
        for (Index e = 0; e < net.num_lines(); ++e) loss += net.lines()[e].r * z[lay.l(e)];
        out << "losses " << detail::sci(loss) << '\n';
      }
      if (!pf_args.out.empty()) {
        std::filesystem::create_directories(pf_args.out);
        write_text_file((std::filesystem::path(pf_args.out) / "power_flow.json").string(),
                        point_json("aux", z, nullptr, &t, net).dump(2) + "\n");
      }
      return kExitOk;
    }
    if (val_cmd->parsed()) {
      const Network net = load_network(val_args.network);
      const std::vector<std::string> problems = validate(net);
      long long trees = -1;
      bool capped = false;
      try {
        trees = static_cast<long long>(enumerate_radial(net, cap).size());
      } catch (const CapExceeded& e) {
        trees = e.lower_bound();
        capped = true;
      }
      const json j{{"network", network_name(val_args.network)},
                   {"buses", net.num_buses()},
                   {"lines", net.num_lines()},
                   {"big_m", net.big_m()},
                   {"spanning_trees", trees},
                   {"spanning_trees_capped", capped},
                   {"problems", problems}};
      if (val_args.format == "json") {
        out << j.dump(2) << '\n';
      } else {
        out << "buses            " << net.num_buses() << '\n';
        out << "lines            " << net.num_lines() << '\n';
        out << "big-M            " << detail::sci(net.big_m()) << '\n';
        out << "spanning trees   " << (capped ? "at least " : "") << trees << '\n';
        for (const std::string& p : problems) out << "problem: " << p << '\n';
        out << (problems.empty() ? "valid\n" : "invalid\n");
      }
      return problems.empty() ? kExitOk : kExitDomain;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace dnr::cli
