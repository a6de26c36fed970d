#pragma once

#include <fstream>
#include <map>
#include <string>

#include "gwlp/gwlp.hpp"
#include "gwlp/json_io.hpp"

namespace gwlp::testing_fixtures {

inline std::string fixture(const std::string& name) { return std::string(GWLP_FIXTURE_DIR) + "/" + name; }

/// The 16-run 4^3 orthogonal array shipped as fixtures/oa16.txt.
inline Design oa16() { return read_design_file(fixture("oa16.txt")); }

/// Table of nonzero J-characteristics per structure literal, keyed by element label.
inline std::map<std::string, std::map<std::string, Complex>> oa16_spectra() {
  std::ifstream in(fixture("oa16_spectra.json"));
  const auto doc = Json::parse(in);
  std::map<std::string, std::map<std::string, Complex>> out;
  for (const auto& [groups, values] : doc.at("structures").items())
    for (const auto& [label, v] : values.items())
      out[groups][label] = {v.at("re").get<double>(), v.at("im").get<double>()};
  return out;
}

}  // namespace gwlp::testing_fixtures
