#pragma once

// Command-line front end. Exit codes: 0 success, 1 usage error,
// 2 data or parse error, 3 verification failure.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gwlp/gwlp.hpp"
#include "gwlp/json_io.hpp"

namespace gwlp::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kVerification = 3 };

namespace detail {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_gwlp(const Gwlp& gwlp) {
  std::string out = "A = (";
  const auto values = gwlp.values();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (j) out += ", ";
    out += format_number(values[j]);
  }
  return out + ")";
}

inline std::string format_resolution(const Gwlp& gwlp, double tol) {
  const auto rs = resolution_and_strength(gwlp, tol);
  return "resolution " + (rs.resolution ? std::to_string(*rs.resolution) : std::string("none")) + ", strength " +
         std::to_string(rs.strength);
}

inline StructureAssignment parse_assignment(const std::string& literal, const Design& design) {
  StructureAssignment a;
  try {
    a = StructureAssignment::parse(literal);
    a.validate(design.level_counts());
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("--groups: ") + e.what());
  }
  return a;
}

inline std::vector<std::size_t> parse_factor_list(const std::string& text, std::size_t k) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t f = 0;
    try {
      std::size_t used = 0;
      f = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw UsageError("--factors: '" + item + "' is not a factor number");
    }
    if (f < 1 || f > k) throw UsageError("--factors: factor " + item + " out of range 1.." + std::to_string(k));
    out.push_back(f - 1);
  }
  return out;
}

}  // namespace detail

/// Runs one invocation. `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized wordlength patterns and J-characteristics of factorial designs", "gwlp"};
  app.require_subcommand(1);

  struct Common {
    bool json = false;
    std::string output;
    double tol = 1e-9;
    double cross_tol = 1e-8;
    unsigned threads = 1;
  } common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("--json", common.json, "Emit JSON");
    sub->add_option("--output,-o", common.output, "Write the report to a file");
    sub->add_option("--tol", common.tol, "Zero tolerance for comparisons")->check(CLI::PositiveNumber);
    sub->add_option("--cross-tol", common.cross_tol, "Cross-route acceptance tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  };

  std::string design_path, second_path, groups, algorithm, factors;
  std::string inv_groups = "all";
  std::uint64_t order = 0;

  auto* gwlp_cmd = app.add_subcommand("gwlp", "Generalized wordlength pattern");
  gwlp_cmd->add_option("design", design_path, "Design file")->required();
  gwlp_cmd->add_option("--groups", groups, "Per-factor structures, e.g. 4,2x2,4");
  gwlp_cmd->add_option("--algorithm", algorithm, "dense | factorized | margin")
      ->check(CLI::IsMember({"dense", "factorized", "margin"}));
  add_common(gwlp_cmd);

  auto* jchar_cmd = app.add_subcommand("jchar", "J-characteristics under a structure assignment");
  jchar_cmd->add_option("design", design_path, "Design file")->required();
  jchar_cmd->add_option("--groups", groups, "Per-factor structures, e.g. 4,2x2,4")->required();
  jchar_cmd->add_option("--algorithm", algorithm, "dense | factorized")
      ->check(CLI::IsMember({"dense", "factorized"}));
  add_common(jchar_cmd);

  auto* recon_cmd = app.add_subcommand("reconstruct", "Recover a design from its J-characteristics (JSON)");
  recon_cmd->add_option("spectrum", design_path, "Spectrum JSON as written by `jchar --json`")->required();
  recon_cmd->add_option("--groups", groups, "Override the structures recorded in the spectrum");
  add_common(recon_cmd);

  auto* inv_cmd = app.add_subcommand("invariance", "Compare the GWLP across structure assignments");
  inv_cmd->add_option("design", design_path, "Design file")->required();
  inv_cmd->add_option("--groups", inv_groups, "`all`, or assignments separated by ';'")->capture_default_str();
  inv_cmd->add_option("--algorithm", algorithm, "dense | factorized")
      ->check(CLI::IsMember({"dense", "factorized"}));
  add_common(inv_cmd);

  auto* margins_cmd = app.add_subcommand("margins", "Marginal counts over a factor subset");
  margins_cmd->add_option("design", design_path, "Design file")->required();
  margins_cmd->add_option("--factors", factors, "1-based factor list, e.g. 1,2 (empty for none)");
  add_common(margins_cmd);

  auto* compare_cmd = app.add_subcommand("compare", "Rank two designs by aberration");
  compare_cmd->add_option("first", design_path, "First design file")->required();
  compare_cmd->add_option("second", second_path, "Second design file")->required();
  add_common(compare_cmd);

  auto* enum_cmd = app.add_subcommand("enumerate-groups", "Abelian groups of a given order");
  enum_cmd->add_option("order", order, "Group order")->required()->check(CLI::PositiveNumber);
  add_common(enum_cmd);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  std::ostringstream report;
  int status = kOk;
  try {
    const Tolerances tolerances{common.tol, common.cross_tol};

    if (*gwlp_cmd) {
      const Design design = read_design_file(design_path);
      if (algorithm.empty()) algorithm = groups.empty() ? "margin" : "factorized";
      Gwlp result;
      std::optional<StructureAssignment> assignment;
      if (!groups.empty()) assignment = detail::parse_assignment(groups, design);
      if (algorithm == "margin") {
        result = gwlp_margin(design, common.tol);
      } else {
        if (!assignment) throw detail::UsageError("--algorithm " + algorithm + " requires --groups");
        const auto alg = algorithm == "dense" ? Algorithm::dense : Algorithm::factorized;
        result = gwlp_char(j_characteristics(design, *assignment, alg), *assignment, common.tol);
      }
      if (common.json) {
        Json doc = gwlp_to_json(result);
        doc["algorithm"] = algorithm;
        if (assignment) doc["groups"] = assignment->to_string();
        report << doc.dump(2) << '\n';
      } else {
        report << detail::format_gwlp(result) << '\n' << detail::format_resolution(result, common.tol) << '\n';
      }
    } else if (*jchar_cmd) {
      const Design design = read_design_file(design_path);
      const auto assignment = detail::parse_assignment(groups, design);
      const auto alg = algorithm == "dense" ? Algorithm::dense : Algorithm::factorized;
      const JCharVector jc = j_characteristics(design, assignment, alg);
      if (common.json) {
        report << jchar_to_json(design, assignment, jc, common.tol).dump(2) << '\n';
      } else {
        report << "# J-characteristics under " << assignment.to_string() << " (zeros omitted)\n"
               << render_jchar_table(design, jc, common.tol);
      }
    } else if (*recon_cmd) {
      std::ifstream in(design_path);
      if (!in) throw ParseError(0, "cannot open spectrum file '" + design_path + "'");
      Json doc;
      try {
        doc = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(0, std::string("spectrum JSON: ") + e.what());
      }
      const ParsedSpectrum spectrum = jchar_from_json(doc);
      const Design shape(spectrum.symbols, std::span<const WeightedRun>{});
      const std::string literal = groups.empty() ? spectrum.groups : groups;
      if (literal.empty()) throw detail::UsageError("reconstruct: no --groups given and none recorded in the spectrum");
      const auto assignment = detail::parse_assignment(literal, shape);
      const auto counts = reconstruct(spectrum.jchar, assignment);
      const Design design = Design::from_dense(spectrum.symbols, counts);
      if (design.runs() != spectrum.jchar.runs) {
        throw InconsistentSpectrum("reconstruct: recovered " + std::to_string(design.runs()) + " runs, spectrum says " +
                                   std::to_string(spectrum.jchar.runs));
      }
      if (common.json) {
        Json runs = Json::array();
        for (std::size_t r = 0; r < design.distinct_runs(); ++r) {
          std::vector<std::string> levels;
          for (std::size_t i = 0; i < design.factors(); ++i) levels.push_back(design.symbols()[i][design.run(r)[i]]);
          runs.push_back(Json{{"levels", levels}, {"count", design.multiplicity(r)}});
        }
        report << Json{{"groups", assignment.to_string()}, {"N", design.runs()}, {"runs", runs}}.dump(2) << '\n';
      } else {
        report << serialize_design(design);
      }
    } else if (*inv_cmd) {
      const Design design = read_design_file(design_path);
      InvarianceOptions options;
      options.tolerances = tolerances;
      options.threads = common.threads;
      options.algorithm = algorithm == "dense" ? Algorithm::dense : Algorithm::factorized;
      InvarianceReport result;
      if (inv_groups == "all") {
        result = verify_invariance_all(design, options);
      } else {
        std::vector<StructureAssignment> list;
        std::stringstream ss(inv_groups);
        std::string item;
        while (std::getline(ss, item, ';'))
          if (!item.empty()) list.push_back(detail::parse_assignment(item, design));
        if (list.empty()) throw detail::UsageError("--groups: no assignments given");
        result = verify_invariance(design, std::move(list), options);
      }
      if (common.json) {
        report << invariance_to_json(design, result).dump(2) << '\n';
      } else {
        for (std::size_t i = 0; i < result.assignments.size(); ++i)
          report << result.assignments[i].to_string() << ": " << detail::format_gwlp(result.gwlps[i]) << '\n';
        report << "margin: " << detail::format_gwlp(result.margin) << '\n';
        const std::size_t n = result.assignments.size();
        report << n << (n == 1 ? " assignment" : " assignments") << ", max GWLP deviation ";
        if (result.max_deviation < tolerances.internal) {
          report << "< " << format_number(tolerances.internal);
        } else {
          report << format_number(result.max_deviation);
        }
        if (result.witness) {
          const auto& w = *result.witness;
          report << "; J-characteristics differ (witness " << w.label << ": "
                 << format_complex(w.first_value, tolerances.internal) << " vs "
                 << format_complex(w.second_value, tolerances.internal) << ")";
        } else if (n > 1) {
          report << "; J-characteristics agree";
        }
        report << '\n' << detail::format_resolution(result.margin, tolerances.internal) << '\n';
      }
      if (!result.invariant()) {
        err << "invariance: GWLP deviation " << format_number(result.max_deviation) << " exceeds tolerance "
            << format_number(tolerances.cross_route) << '\n';
        status = kVerification;
      }
    } else if (*margins_cmd) {
      const Design design = read_design_file(design_path);
      const auto members = detail::parse_factor_list(factors, design.factors());
      const FactorSet subset = FactorSet::of(members);
      const MarginTable table = margins(design, subset);
      const SubsetNorm b = subset_norm(design, subset);
      if (common.json) {
        Json doc = margin_to_json(design, table);
        doc["subset_norm"] = json_number(b.value);
        report << doc.dump(2) << '\n';
      } else {
        for (const auto& e : table.nonzero()) {
          std::uint64_t key = e.cell;
          std::vector<std::string> combo(table.factors().size());
          for (std::size_t i = combo.size(); i-- > 0;) {
            combo[i] = design.symbols()[table.factors()[i]][key % table.sizes()[i]];
            key /= table.sizes()[i];
          }
          std::string label;
          for (const auto& c : combo) label += (label.empty() ? "" : " ") + c;
          report << (label.empty() ? "()" : label) << '\t' << e.count << '\n';
        }
        report << "N = " << table.total() << ", B = " << format_number(b.value) << '\n';
      }
    } else if (*compare_cmd) {
      const Design first = read_design_file(design_path);
      const Design second = read_design_file(second_path);
      const Gwlp a = gwlp_margin(first, common.tol);
      const Gwlp b = gwlp_margin(second, common.tol);
      AberrationVerdict verdict;
      try {
        verdict = compare_aberration(a, b, common.tol);
      } catch (const InvalidArgument& e) {
        throw detail::UsageError(e.what());
      }
      if (common.json) {
        report << Json{{"first", gwlp_to_json(a)},
                       {"second", gwlp_to_json(b)},
                       {"verdict", to_string(verdict.order)},
                       {"index", verdict.index ? Json(*verdict.index) : Json(nullptr)}}
                      .dump(2)
               << '\n';
      } else {
        report << "first:  " << detail::format_gwlp(a) << '\n' << "second: " << detail::format_gwlp(b) << '\n';
        report << to_string(verdict.order);
        if (verdict.index) report << " at A_" << *verdict.index;
        report << '\n';
      }
    } else if (*enum_cmd) {
      const auto structures = enumerate_structures(order);
      if (common.json) {
        Json list = Json::array();
        for (const auto& s : structures) list.push_back(s.to_string());
        report << Json{{"order", order}, {"structures", list}}.dump(2) << '\n';
      } else {
        for (std::size_t i = 0; i < structures.size(); ++i) report << (i ? "; " : "") << structures[i].to_string();
        report << '\n';
      }
    }
  } catch (const detail::UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }

  if (!common.output.empty()) {
    std::ofstream file(common.output, std::ios::binary);
    if (!file) {
      err << "error: cannot write '" << common.output << "'\n";
      return kData;
    }
    file << report.str();
  } else {
    out << report.str();
  }
  return status;
}

}  // namespace gwlp::cli
