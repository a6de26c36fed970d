#pragma once

// J-characteristics chi_g(D) = sum_h O(h) chi_g(h), reconstruction of the
// counts from them, and the generalized wordlength pattern computed from
// the character spectrum.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gwlp/common.hpp"
#include "gwlp/design.hpp"
#include "gwlp/groups.hpp"
#include "gwlp/tensorlin.hpp"

namespace gwlp {

/// One abelian group structure per factor, imposed on that factor's levels
/// through the Yates index (level l <-> group element of flat index l).
class StructureAssignment {
 public:
  StructureAssignment() = default;
  explicit StructureAssignment(std::vector<AbelianStructure> parts) : parts_(std::move(parts)) {}

  /// Comma-separated structure literals, e.g. `4,2x2,4`.
  static StructureAssignment parse(std::string_view literal) {
    std::vector<AbelianStructure> parts;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = std::min(literal.find(',', pos), literal.size());
      parts.push_back(AbelianStructure::parse(literal.substr(pos, end - pos)));
      if (end == literal.size()) break;
      pos = end + 1;
    }
    return StructureAssignment(std::move(parts));
  }

  /// Z_{s_i} at every factor (canonicalized).
  static StructureAssignment cyclic(std::span<const std::uint64_t> level_counts) {
    std::vector<AbelianStructure> parts;
    for (const auto s : level_counts) parts.push_back(AbelianStructure::cyclic(s));
    return StructureAssignment(std::move(parts));
  }

  const std::vector<AbelianStructure>& parts() const noexcept { return parts_; }
  std::size_t factors() const noexcept { return parts_.size(); }
  const AbelianStructure& operator[](std::size_t i) const { return parts_[i]; }

  std::vector<std::uint64_t> orders() const {
    std::vector<std::uint64_t> out;
    for (const auto& p : parts_) out.push_back(p.order());
    return out;
  }

  void validate(std::span<const std::uint64_t> level_counts) const {
    if (parts_.size() != level_counts.size()) {
      throw InvalidArgument("assignment has " + std::to_string(parts_.size()) + " structures, design has " +
                            std::to_string(level_counts.size()) + " factors");
    }
    for (std::size_t i = 0; i < parts_.size(); ++i)
      if (parts_[i].order() != level_counts[i]) {
        throw InvalidArgument("factor " + std::to_string(i + 1) + " has " + std::to_string(level_counts[i]) +
                              " levels but structure " + parts_[i].to_string() + " has order " +
                              std::to_string(parts_[i].order()));
      }
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += ',';
      out += parts_[i].to_string();
    }
    return out;
  }

  friend bool operator==(const StructureAssignment&, const StructureAssignment&) = default;

 private:
  std::vector<AbelianStructure> parts_;
};

/// Number of factors whose component of g (a Yates index over the level
/// counts) is not the identity.
inline std::size_t weight(std::span<const std::uint64_t> level_counts, std::uint64_t index) {
  std::size_t w = 0;
  for (std::size_t i = level_counts.size(); i-- > 0;) {
    if (index % level_counts[i] != 0) ++w;
    index /= level_counts[i];
  }
  return w;
}

inline std::size_t weight(const StructureAssignment& assignment, std::uint64_t index) {
  return weight(assignment.orders(), index);
}

enum class Algorithm { dense, factorized };

struct JCharVector {
  std::vector<Complex> values;  // Yates-indexed by g
  std::uint64_t runs = 0;       // N
  std::vector<std::uint64_t> level_counts;
};

namespace detail {

inline std::vector<ComplexMatrix> factor_tables(const StructureAssignment& assignment, bool adjoint = false) {
  std::vector<ComplexMatrix> tables;
  tables.reserve(assignment.factors());
  for (const auto& part : assignment.parts()) {
    auto h = character_table(part, std::numeric_limits<std::uint64_t>::max()).entries;
    tables.push_back(adjoint ? h.adjoint() : std::move(h));
  }
  return tables;
}

inline std::uint64_t product(std::span<const std::uint64_t> sizes) {
  std::uint64_t s = 1;
  for (const auto x : sizes) s = checked_mul(s, x, "product");
  return s;
}

}  // namespace detail

/// chi = H O. `dense` evaluates every entry of H (row by row, O(s^2 k));
/// `factorized` applies the per-factor tables along their own axes.
inline JCharVector j_characteristics(const Design& design, const StructureAssignment& assignment,
                                     Algorithm algorithm = Algorithm::factorized, const Limits& limits = {}) {
  assignment.validate(design.level_counts());
  const std::uint64_t s = design.size();
  const auto& counts = design.level_counts();
  const std::size_t k = counts.size();
  const auto tables = detail::factor_tables(assignment);

  JCharVector out{{}, design.runs(), counts};
  if (algorithm == Algorithm::factorized) {
    if (s > limits.factorized) {
      throw ResourceLimit("j_characteristics: s = " + std::to_string(s) + " exceeds factorized cap " +
                          std::to_string(limits.factorized));
    }
    out.values.assign(s, Complex{});
    for (std::size_t r = 0; r < design.distinct_runs(); ++r)
      out.values[design.flat_index(r)] = static_cast<double>(design.multiplicity(r));
    factored_apply_in_place(tables, out.values);
    return out;
  }

  if (s > limits.dense_table) {
    throw ResourceLimit("j_characteristics: s = " + std::to_string(s) + " exceeds dense cap " +
                        std::to_string(limits.dense_table) + "; use the factorized algorithm");
  }
  const auto dense = design.dense_counts(limits.dense_table);
  std::vector<LevelIndex> digits(s * k);
  for (std::uint64_t x = 0; x < s; ++x) {
    std::uint64_t rest = x;
    for (std::size_t i = k; i-- > 0;) {
      digits[x * k + i] = static_cast<LevelIndex>(rest % counts[i]);
      rest /= counts[i];
    }
  }
  out.values.assign(s, Complex{});
  for (std::uint64_t g = 0; g < s; ++g) {
    Complex acc{};
    for (std::uint64_t h = 0; h < s; ++h) {
      if (dense[h] == 0) continue;
      Complex entry{1.0, 0.0};
      for (std::size_t i = 0; i < k; ++i) entry *= tables[i](digits[g * k + i], digits[h * k + i]);
      acc += static_cast<double>(dense[h]) * entry;
    }
    out.values[g] = acc;
  }
  return out;
}

/// O = (1/s) H* chi, rounded to integers. Throws InconsistentSpectrum when
/// some (H* chi)_g is farther than `tolerance` from s times a nonnegative
/// integer; a negative tolerance means the default 1e-6 * s.
inline std::vector<std::uint64_t> reconstruct(const JCharVector& jchar, const StructureAssignment& assignment,
                                              double tolerance = -1.0, const Limits& limits = {}) {
  assignment.validate(jchar.level_counts);
  const std::uint64_t s = detail::product(jchar.level_counts);
  if (jchar.values.size() != s) {
    throw InvalidArgument("reconstruct: spectrum has " + std::to_string(jchar.values.size()) + " entries, expected " +
                          std::to_string(s));
  }
  if (s > limits.factorized) throw ResourceLimit("reconstruct: s exceeds factorized cap");
  if (tolerance < 0) tolerance = 1e-6 * static_cast<double>(s);

  auto values = jchar.values;
  factored_apply_in_place(detail::factor_tables(assignment, /*adjoint=*/true), values);
  std::vector<std::uint64_t> counts(s);
  for (std::uint64_t g = 0; g < s; ++g) {
    const Complex o = values[g] / static_cast<double>(s);
    const double rounded = std::round(o.real());
    if (std::abs(values[g] - Complex{rounded * static_cast<double>(s), 0.0}) > tolerance || rounded < 0.0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "entry %llu reconstructs to %.6g%+.6gi", static_cast<unsigned long long>(g),
                    o.real(), o.imag());
      throw InconsistentSpectrum(std::string("reconstruct: ") + buf + ", not a nonnegative integer count");
    }
    counts[g] = static_cast<std::uint64_t>(rounded);
  }
  return counts;
}

/// (A_0, A_1, ..., A_k). Raw values are kept; `operator[]` and `values()`
/// clamp floating-point noise below zero to 0.
class Gwlp {
 public:
  Gwlp() = default;
  Gwlp(std::vector<double> raw, double tolerance) : raw_(std::move(raw)), tolerance_(tolerance) {}

  std::size_t factors() const noexcept { return raw_.empty() ? 0 : raw_.size() - 1; }
  double tolerance() const noexcept { return tolerance_; }
  const std::vector<double>& raw() const noexcept { return raw_; }

  double operator[](std::size_t j) const { return clamp(raw_.at(j)); }

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(raw_.size());
    for (const double x : raw_) out.push_back(clamp(x));
    return out;
  }

  double sum() const {
    double acc = 0.0;
    for (const double x : raw_) acc += x;
    return acc;
  }

 private:
  static double clamp(double x) { return x <= 0.0 ? 0.0 : x; }

  std::vector<double> raw_;
  double tolerance_ = 1e-9;
};

/// A_j = N^-2 sum over weight-j elements g of |chi_g(D)|^2.
inline Gwlp gwlp_char(const JCharVector& jchar, const StructureAssignment& assignment, double tolerance = 1e-9) {
  assignment.validate(jchar.level_counts);
  if (jchar.runs == 0) throw InvalidArgument("gwlp_char: design has no runs");
  if (jchar.values.size() != detail::product(jchar.level_counts)) {
    throw InvalidArgument("gwlp_char: spectrum length does not match the level counts");
  }
  const auto& counts = jchar.level_counts;
  const std::size_t k = counts.size();
  std::vector<double> sums(k + 1, 0.0);
  // Mixed-radix odometer tracking the weight incrementally.
  std::vector<std::uint64_t> digit(k, 0);
  std::size_t w = 0;
  for (std::uint64_t g = 0; g < jchar.values.size(); ++g) {
    sums[w] += std::norm(jchar.values[g]);
    for (std::size_t i = k; i-- > 0;) {
      if (++digit[i] < counts[i]) {
        if (digit[i] == 1) ++w;
        break;
      }
      digit[i] = 0;
      if (counts[i] > 1) --w;
    }
  }
  const double n2 = static_cast<double>(jchar.runs) * static_cast<double>(jchar.runs);
  for (auto& x : sums) x /= n2;
  return Gwlp(std::move(sums), tolerance);
}

/// 12 significant digits, no trailing zeros, never "-0".
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x + 0.0);
  std::string out = buf;
  if (out == "-0") out = "0";
  return out;
}

/// `a+bi` / `a-bi`, dropping parts whose modulus is within `tolerance` of 0.
inline std::string format_complex(Complex z, double tolerance = 1e-9) {
  const double re = std::abs(z.real()) <= tolerance ? 0.0 : z.real();
  const double im = std::abs(z.imag()) <= tolerance ? 0.0 : z.imag();
  if (im == 0.0) return format_number(re);
  const std::string imag = format_number(std::abs(im)) + "i";
  if (re == 0.0) return (im < 0 ? "-" : "") + imag;
  return format_number(re) + (im < 0 ? "-" : "+") + imag;
}

/// The level symbols of g, concatenated when every symbol is one character
/// and comma-separated otherwise.
inline std::string element_label(const Design& design, std::uint64_t index) {
  const std::size_t k = design.factors();
  bool compact = true;
  for (const auto& alphabet : design.symbols())
    for (const auto& sym : alphabet) compact = compact && sym.size() == 1;
  std::vector<std::string> parts(k);
  for (std::size_t i = k; i-- > 0;) {
    parts[i] = design.symbols()[i][index % design.level_counts()[i]];
    index /= design.level_counts()[i];
  }
  std::string out;
  for (std::size_t i = 0; i < k; ++i) {
    if (i && !compact) out += ',';
    out += parts[i];
  }
  return out;
}

/// Two-column text table of the nonzero J-characteristics, in Yates order.
inline std::string render_jchar_table(const Design& design, const JCharVector& jchar, double tolerance = 1e-9) {
  std::string out;
  for (std::uint64_t g = 0; g < jchar.values.size(); ++g) {
    if (std::abs(jchar.values[g]) <= tolerance) continue;
    out += element_label(design, g) + "\t" + format_complex(jchar.values[g], tolerance) + "\n";
  }
  return out;
}

}  // namespace gwlp
