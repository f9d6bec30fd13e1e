// Solves every spanning tree of a network, then certifies the best one as a
// KKT point of the reconfiguration program.
//
//   certify_network [network.json]

#include <iostream>

#include "dnr/dnr.hpp"

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : std::string(DNR_DATA_DIR) + "/net4.json";
  try {
    const dnr::Network net = dnr::load_network(path);
    dnr::StudyResult study = dnr::solve_enumerate(net);
    study.network = path;
    std::cout << dnr::render(study, net);

    // The same certificate for every topology, not only the best one.
    int passed = 0;
    for (const dnr::TopologyRecord& rec : study.records) {
      const dnr::AuxModel aux(net, rec.topology);
      const dnr::Certificate c = dnr::certify(aux, rec.z, rec.multipliers);
      passed += c.kkt.passed() ? 1 : 0;
    }
    std::cout << "\nlifted certificates passing: " << passed << " of " << study.records.size() << '\n';
  } catch (const dnr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
