#pragma once

// JSON forms of spectra, wordlength patterns, margins and invariance
// reports. Numbers are rounded to 12 significant digits and integral values
// are written as integers, so identical inputs give byte-identical output.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include "gwlp/design.hpp"
#include "gwlp/invariance.hpp"
#include "gwlp/spectra.hpp"
#include <json.hpp>

namespace gwlp {

using Json = nlohmann::ordered_json;

inline Json json_number(double x) {
  const double rounded = std::strtod(format_number(x).c_str(), nullptr);
  if (std::abs(rounded) < 9.0e15 && rounded == std::trunc(rounded)) return static_cast<std::int64_t>(rounded);
  return rounded;
}

inline Json json_complex(Complex z, double tolerance = 0.0) {
  const double re = std::abs(z.real()) <= tolerance ? 0.0 : z.real();
  const double im = std::abs(z.imag()) <= tolerance ? 0.0 : z.imag();
  return Json{{"re", json_number(re)}, {"im", json_number(im)}};
}

inline Json gwlp_to_json(const Gwlp& gwlp) {
  Json a = Json::array();
  for (const double x : gwlp.values()) a.push_back(json_number(x));
  const auto rs = resolution_and_strength(gwlp, gwlp.tolerance());
  Json out{{"A", a}, {"tolerance", gwlp.tolerance()}};
  out["resolution"] = rs.resolution ? Json(*rs.resolution) : Json(nullptr);
  out["strength"] = rs.strength;
  return out;
}

inline Json symbols_to_json(const Design& design) {
  Json out = Json::array();
  for (const auto& alphabet : design.symbols()) out.push_back(alphabet);
  return out;
}

/// {"groups", "N", "levels", "symbols", "values": {label: {"re","im"}}} in Yates order.
inline Json jchar_to_json(const Design& design, const StructureAssignment& assignment, const JCharVector& jchar,
                          double tolerance = 1e-9) {
  Json values = Json::object();
  for (std::uint64_t g = 0; g < jchar.values.size(); ++g)
    values[element_label(design, g)] = json_complex(jchar.values[g], tolerance);
  return Json{{"groups", assignment.to_string()},
              {"N", jchar.runs},
              {"levels", jchar.level_counts},
              {"symbols", symbols_to_json(design)},
              {"values", std::move(values)}};
}

struct ParsedSpectrum {
  JCharVector jchar;
  std::vector<std::vector<std::string>> symbols;
  std::string groups;
};

/// Inverse of jchar_to_json. Values are matched to elements by label.
inline ParsedSpectrum jchar_from_json(const Json& doc) {
  try {
    ParsedSpectrum out;
    out.symbols = doc.at("symbols").get<std::vector<std::vector<std::string>>>();
    if (doc.contains("groups")) out.groups = doc.at("groups").get<std::string>();
    const Design shape(out.symbols, std::span<const WeightedRun>{});
    out.jchar.level_counts = shape.level_counts();
    out.jchar.runs = doc.at("N").get<std::uint64_t>();
    if (shape.size() > Limits{}.factorized) throw ParseError(0, "spectrum too large");
    std::map<std::string, std::uint64_t> index;
    for (std::uint64_t g = 0; g < shape.size(); ++g) index.emplace(element_label(shape, g), g);
    const auto& values = doc.at("values");
    if (values.size() != shape.size()) {
      throw ParseError(0, "spectrum lists " + std::to_string(values.size()) + " values, expected " +
                              std::to_string(shape.size()));
    }
    out.jchar.values.assign(shape.size(), Complex{});
    std::vector<bool> seen(shape.size(), false);
    for (const auto& [label, v] : values.items()) {
      const auto it = index.find(label);
      if (it == index.end() || seen[it->second]) throw ParseError(0, "unknown or repeated element '" + label + "'");
      seen[it->second] = true;
      out.jchar.values[it->second] = {v.at("re").get<double>(), v.at("im").get<double>()};
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("spectrum JSON: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(0, std::string("spectrum JSON: ") + e.what());
  }
}

inline Json margin_to_json(const Design& design, const MarginTable& table) {
  Json factors = Json::array();
  for (const auto f : table.factors()) factors.push_back(f + 1);
  Json cells = Json::array();
  for (const auto& e : table.nonzero()) {
    std::uint64_t key = e.cell;
    std::vector<std::string> combo(table.factors().size());
    for (std::size_t i = combo.size(); i-- > 0;) {
      combo[i] = design.symbols()[table.factors()[i]][key % table.sizes()[i]];
      key /= table.sizes()[i];
    }
    cells.push_back(Json{{"levels", combo}, {"count", e.count}});
  }
  return Json{{"factors", factors}, {"N", table.total()}, {"cells", table.cells()}, {"counts", cells}};
}

inline Json invariance_to_json(const Design& design, const InvarianceReport& report) {
  Json assignments = Json::array();
  for (std::size_t i = 0; i < report.assignments.size(); ++i)
    assignments.push_back(Json{{"groups", report.assignments[i].to_string()}, {"gwlp", gwlp_to_json(report.gwlps[i])}});
  Json deviation = Json::array();
  for (const auto& row : report.deviation) {
    Json r = Json::array();
    for (const double d : row) r.push_back(json_number(d));
    deviation.push_back(r);
  }
  Json by_order = Json::array();
  for (const double d : report.max_deviation_by_order) by_order.push_back(json_number(d));
  Json witness = nullptr;
  if (report.witness) {
    const auto& w = *report.witness;
    witness = Json{{"element", w.label},
                   {"first", report.assignments[w.first].to_string()},
                   {"second", report.assignments[w.second].to_string()},
                   {"first_value", json_complex(w.first_value, report.tolerances.internal)},
                   {"second_value", json_complex(w.second_value, report.tolerances.internal)}};
  }
  const auto rs = resolution_and_strength(report.margin, report.tolerances.internal);
  return Json{{"N", design.runs()},
              {"levels", design.level_counts()},
              {"assignments", assignments},
              {"margin", gwlp_to_json(report.margin)},
              {"deviation", deviation},
              {"max_deviation_by_order", by_order},
              {"max_deviation", json_number(report.max_deviation)},
              {"tolerances", Json{{"internal", report.tolerances.internal},
                                  {"cross_route", report.tolerances.cross_route}}},
              {"invariant", report.invariant()},
              {"jchar_witness", witness},
              {"resolution", rs.resolution ? Json(*rs.resolution) : Json(nullptr)},
              {"strength", rs.strength}};
}

}  // namespace gwlp
