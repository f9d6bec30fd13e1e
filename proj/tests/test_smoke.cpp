#include <gtest/gtest.h>

#include "dnr/kkt.hpp"
#include "dnr/powerflow.hpp"

TEST(Smoke, LoadsNetwork) {
  const dnr::Network net = dnr::load_network(std::string(DNR_DATA_DIR) + "/net4.json");
  EXPECT_EQ(net.num_buses(), 4);
}
