// Runs the relax-round-polish route and compares it with exhaustive
// enumeration.
//
//   direct_vs_enumeration [network.json] [penalty,schedule]

#include <iostream>

#include "dnr/cli.hpp"
#include "dnr/dnr.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(DNR_DATA_DIR) + "/net7.json";
  try {
    const dnr::Network net = dnr::load_network(path);
    dnr::DirectOptions opt;
    if (argc > 2) opt.penalty_schedule = dnr::cli::parse_csv_numbers(argv[2]);
    const dnr::StudyResult direct = dnr::solve_direct(net, opt);
    std::cout << dnr::render(direct, net) << '\n' << dnr::render_timing_table(direct) << '\n';

    const dnr::StudyResult all = dnr::solve_enumerate(net);
    const double gap = direct.direct->polish_objective - all.best_objective;
    std::cout << "enumeration optimum  " << dnr::format_u(all.records[*all.best].topology.u) << "  "
              << all.best_objective << '\n';
    std::cout << "direct route         " << dnr::format_u(direct.direct->rounded.u) << "  "
              << direct.direct->polish_objective << "  (gap " << gap << ")\n";
  } catch (const dnr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
