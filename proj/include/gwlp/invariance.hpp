#pragma once

// The GWLP from margins alone, and checks that it agrees with the
// character route under every abelian structure assignment.
//
// For a factor subset K with margin counts c, the subset norm is
//   B_K = (1 / prod_{i not in K} s_i) * sum c^2,
// which involves no characters. The squared norm of the spectrum restricted
// to elements whose nonidentity components are exactly J is then
//   sum_{g in S_J} |chi_g(D)|^2 = s * sum_{K subset of J} (-1)^{|J \ K|} B_K,
// and A_j sums these over |J| = j, divided by N^2.
//
// s * B_K = (prod_{i in K} s_i) * sum c^2 is an integer, so the whole
// alternating sum is carried out exactly in 128-bit arithmetic.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gwlp/common.hpp"
#include "gwlp/design.hpp"
#include "gwlp/groups.hpp"
#include "gwlp/spectra.hpp"

namespace gwlp {

struct SubsetNorm {
  FactorSet factors;
  double value = 0.0;  // B_K
  Int128 scaled = 0;   // s * B_K, exact
};

enum class MobiusMethod { automatic, submask, fast };

namespace detail {

inline constexpr std::size_t kMaxMarginFactors = 30;
inline constexpr std::size_t kSubmaskMaxFactors = 16;

inline void check_exact_range(const Design& design) {
  const std::size_t k = design.factors();
  if (k > kMaxMarginFactors) {
    throw ResourceLimit("margin route: " + std::to_string(k) + " factors exceeds the limit of " +
                        std::to_string(kMaxMarginFactors));
  }
  const int bits = std::bit_width(design.size()) + 2 * std::bit_width(design.runs()) + static_cast<int>(k) + 1;
  if (bits > 126) throw ResourceLimit("margin route: s * N^2 too large for exact 128-bit accumulation");
}

inline Int128 scaled_subset_norm(const Design& design, FactorSet subset) {
  const MarginTable table = margins(design, subset);
  return static_cast<Int128>(table.cells()) * static_cast<Int128>(table.sum_of_squares());
}

}  // namespace detail

inline SubsetNorm subset_norm(const Design& design, FactorSet subset) {
  detail::check_exact_range(design);
  const Int128 scaled = detail::scaled_subset_norm(design, subset);
  return {subset, static_cast<double>(static_cast<long double>(scaled) / static_cast<long double>(design.size())),
          scaled};
}

/// s * B_K for every K, indexed by bitmask.
inline std::vector<Int128> scaled_subset_norms(const Design& design) {
  detail::check_exact_range(design);
  const std::uint64_t subsets = std::uint64_t{1} << design.factors();
  std::vector<Int128> out(subsets);
  for (std::uint64_t mask = 0; mask < subsets; ++mask)
    out[mask] = detail::scaled_subset_norm(design, FactorSet(mask));
  return out;
}

/// Inverts downward subset sums: out[J] = sum_{K subset of J} (-1)^{|J \ K|} in[K].
inline std::vector<Int128> mobius_invert(std::vector<Int128> values, std::size_t factors,
                                         MobiusMethod method = MobiusMethod::automatic) {
  if (values.size() != (std::size_t{1} << factors)) throw InvalidArgument("mobius_invert: length is not 2^factors");
  if (method == MobiusMethod::automatic) {
    method = factors <= detail::kSubmaskMaxFactors ? MobiusMethod::submask : MobiusMethod::fast;
  }
  if (method == MobiusMethod::fast) {
    for (std::size_t bit = 0; bit < factors; ++bit)
      for (std::size_t mask = 0; mask < values.size(); ++mask)
        if (mask & (std::size_t{1} << bit)) values[mask] -= values[mask ^ (std::size_t{1} << bit)];
    return values;
  }
  std::vector<Int128> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) {
    Int128 acc = 0;
    const int full = std::popcount(j);
    for (std::size_t sub = j;; sub = (sub - 1) & j) {
      acc += ((full - std::popcount(sub)) % 2 == 0) ? values[sub] : -values[sub];
      if (sub == 0) break;
    }
    out[j] = acc;
  }
  return out;
}

/// Zeta transform: out[K] = sum_{J subset of K} in[J].
inline std::vector<Int128> zeta_transform(std::vector<Int128> values, std::size_t factors) {
  if (values.size() != (std::size_t{1} << factors)) throw InvalidArgument("zeta_transform: length is not 2^factors");
  for (std::size_t bit = 0; bit < factors; ++bit)
    for (std::size_t mask = 0; mask < values.size(); ++mask)
      if (mask & (std::size_t{1} << bit)) values[mask] += values[mask ^ (std::size_t{1} << bit)];
  return values;
}

/// s * ||M_J U O||^2 = sum_{g in S_J} |chi_g(D)|^2 for every J, exact.
inline std::vector<Int128> projected_spectrum_norms(const Design& design,
                                                    MobiusMethod method = MobiusMethod::automatic) {
  auto out = mobius_invert(scaled_subset_norms(design), design.factors(), method);
  for (const Int128 x : out)
    if (x < 0) throw Error("projected_spectrum_norms: negative projection norm (internal error)");
  return out;
}

/// GWLP from margins only; no character or s-length vector is formed.
inline Gwlp gwlp_margin(const Design& design, double tolerance = 1e-9,
                        MobiusMethod method = MobiusMethod::automatic) {
  if (design.runs() == 0) throw InvalidArgument("gwlp_margin: design has no runs");
  const auto norms = projected_spectrum_norms(design, method);
  const std::size_t k = design.factors();
  std::vector<Int128> by_weight(k + 1, 0);
  for (std::size_t j = 0; j < norms.size(); ++j) by_weight[std::popcount(j)] += norms[j];
  const long double n2 = static_cast<long double>(design.runs()) * static_cast<long double>(design.runs());
  std::vector<double> a(k + 1);
  for (std::size_t j = 0; j <= k; ++j) a[j] = static_cast<double>(static_cast<long double>(by_weight[j]) / n2);
  return Gwlp(std::move(a), tolerance);
}

/// Every combination of per-factor structures, last factor varying fastest.
inline std::vector<StructureAssignment> all_assignments(std::span<const std::uint64_t> level_counts,
                                                        std::size_t cap = Limits{}.assignments) {
  std::vector<std::vector<AbelianStructure>> choices;
  std::size_t total = 1;
  for (const auto s : level_counts) {
    choices.push_back(enumerate_structures(s));
    total *= choices.back().size();
    if (total > cap) {
      throw ResourceLimit("all assignments: more than " + std::to_string(cap) + " structure combinations");
    }
  }
  std::vector<StructureAssignment> out;
  std::vector<std::size_t> pick(level_counts.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<AbelianStructure> parts;
    for (std::size_t i = 0; i < pick.size(); ++i) parts.push_back(choices[i][pick[i]]);
    out.emplace_back(std::move(parts));
    for (std::size_t i = pick.size(); i-- > 0;) {
      if (++pick[i] < choices[i].size()) break;
      pick[i] = 0;
    }
  }
  return out;
}

struct JCharWitness {
  std::uint64_t element = 0;
  std::string label;
  std::size_t first = 0;   // assignment indices
  std::size_t second = 0;
  Complex first_value;
  Complex second_value;
};

struct InvarianceOptions {
  Tolerances tolerances;
  Limits limits;
  Algorithm algorithm = Algorithm::factorized;
  unsigned threads = 1;
};

struct InvarianceReport {
  std::vector<StructureAssignment> assignments;
  std::vector<Gwlp> gwlps;  // one per assignment
  Gwlp margin;
  /// Pairwise max_j |A_j - A'_j| over the assignments followed by the margin route.
  std::vector<std::vector<double>> deviation;
  std::vector<double> max_deviation_by_order;  // per j
  double max_deviation = 0.0;
  std::optional<JCharWitness> witness;
  Tolerances tolerances;

  bool invariant() const { return max_deviation <= tolerances.cross_route; }
};

/// Computes the GWLP under each assignment and by margins, and looks for an
/// element whose J-characteristic differs between assignment 0 and another
/// assignment (the last one that differs is reported).
inline InvarianceReport verify_invariance(const Design& design, std::vector<StructureAssignment> assignments,
                                          const InvarianceOptions& options = {}) {
  if (assignments.empty()) throw InvalidArgument("verify_invariance: no assignments");
  for (const auto& a : assignments) a.validate(design.level_counts());

  InvarianceReport report;
  report.tolerances = options.tolerances;
  report.margin = gwlp_margin(design, options.tolerances.internal);

  const std::size_t n = assignments.size();
  const JCharVector reference = j_characteristics(design, assignments[0], options.algorithm, options.limits);
  std::vector<Gwlp> gwlps(n);
  std::vector<std::optional<std::pair<std::uint64_t, Complex>>> first_difference(n);
  gwlps[0] = gwlp_char(reference, assignments[0], options.tolerances.internal);

  auto work = [&](std::size_t i) {
    const JCharVector jc = j_characteristics(design, assignments[i], options.algorithm, options.limits);
    gwlps[i] = gwlp_char(jc, assignments[i], options.tolerances.internal);
    for (std::uint64_t g = 0; g < jc.values.size(); ++g)
      if (std::abs(jc.values[g] - reference.values[g]) > options.tolerances.internal) {
        first_difference[i] = std::pair{g, jc.values[g]};
        break;
      }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 1; i < n; ++i) work(i);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = 1 + t; i < n; i += threads) work(i);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
    }
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  for (std::size_t i = n; i-- > 1;) {
    if (!first_difference[i]) continue;
    const auto [g, value] = *first_difference[i];
    report.witness = JCharWitness{g, element_label(design, g), 0, i, reference.values[g], value};
    break;
  }

  const std::size_t k = design.factors();
  std::vector<const Gwlp*> all;
  for (const auto& g : gwlps) all.push_back(&g);
  all.push_back(&report.margin);
  report.deviation.assign(all.size(), std::vector<double>(all.size(), 0.0));
  report.max_deviation_by_order.assign(k + 1, 0.0);
  for (std::size_t a = 0; a < all.size(); ++a)
    for (std::size_t b = a + 1; b < all.size(); ++b) {
      double d = 0.0;
      for (std::size_t j = 0; j <= k; ++j) {
        const double dj = std::abs(all[a]->raw()[j] - all[b]->raw()[j]);
        d = std::max(d, dj);
        report.max_deviation_by_order[j] = std::max(report.max_deviation_by_order[j], dj);
      }
      report.deviation[a][b] = report.deviation[b][a] = d;
      report.max_deviation = std::max(report.max_deviation, d);
    }
  report.assignments = std::move(assignments);
  report.gwlps = std::move(gwlps);
  return report;
}

inline InvarianceReport verify_invariance_all(const Design& design, const InvarianceOptions& options = {}) {
  return verify_invariance(design, all_assignments(design.level_counts(), options.limits.assignments), options);
}

struct ResolutionStrength {
  std::optional<std::size_t> resolution;  // none when every A_j (j >= 1) vanishes
  std::size_t strength = 0;
};

/// Resolution is the first j >= 1 with A_j > tol. Strength is reported as
/// resolution - 1 (or k), following the usual orthogonal-array reading of a
/// vanishing GWLP prefix.
inline ResolutionStrength resolution_and_strength(const Gwlp& gwlp, double tol = 1e-9) {
  if (!(tol > 0)) throw InvalidArgument("resolution_and_strength: tolerance must be positive");
  for (std::size_t j = 1; j <= gwlp.factors(); ++j)
    if (gwlp[j] > tol) return {j, j - 1};
  return {std::nullopt, gwlp.factors()};
}

struct AberrationVerdict {
  enum class Order { first_better, second_better, tie };
  Order order = Order::tie;
  std::optional<std::size_t> index;  // first j where the patterns differ
};

/// Lexicographic on (A_1, ..., A_k); the smaller first differing entry has
/// less aberration.
inline AberrationVerdict compare_aberration(const Gwlp& a, const Gwlp& b, double tol = 1e-9) {
  if (a.factors() != b.factors()) {
    throw InvalidArgument("compare_aberration: patterns have " + std::to_string(a.factors()) + " and " +
                          std::to_string(b.factors()) + " factors");
  }
  for (std::size_t j = 1; j <= a.factors(); ++j) {
    const double d = a[j] - b[j];
    if (std::abs(d) > tol) {
      return {d < 0 ? AberrationVerdict::Order::first_better : AberrationVerdict::Order::second_better, j};
    }
  }
  return {};
}

inline const char* to_string(AberrationVerdict::Order order) {
  switch (order) {
    case AberrationVerdict::Order::first_better: return "first-better";
    case AberrationVerdict::Order::second_better: return "second-better";
    case AberrationVerdict::Order::tie: return "tie";
  }
  return "tie";
}

}  // namespace gwlp
