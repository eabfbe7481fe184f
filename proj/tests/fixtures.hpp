#pragma once

#include <string>

#include "p2pcf/graph.hpp"
#include "test_support.hpp"

namespace p2pcf::testing {

inline std::string data_path(const std::string& rel) { return std::string(P2PCF_DATA_DIR) + "/" + rel; }

inline const AcquaintanceGraph& tour_graph() {
  static const AcquaintanceGraph g = load_manifest(data_path("tour/manifest.txt"));
  return g;
}

inline ClauseSet tour_expected() {
  return {cl({"Exp"}),           cl({"Pass"}),          cl({"Hotel", "Lodge"}),
          cl({"Hotel", "Palu"}), cl({"Hotel", "AntiM"}), cl({"Hotel", "YellowFev"})};
}

}  // namespace p2pcf::testing
