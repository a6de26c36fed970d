#pragma once

// Finite abelian groups as products of cyclic groups, their elements in
// Yates order, and their degree-one characters.
//
// Elements are flat indices in [0, order) read as mixed-radix numbers over
// the cyclic parts, first part most significant; index 0 is the identity.
// The character indexed by g is h -> prod_j exp(2 pi i g_j h_j / d_j).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwlp/common.hpp"
#include "gwlp/tensorlin.hpp"

namespace gwlp {

namespace detail {

/// Prime factorization as (prime, exponent) pairs, primes ascending.
inline std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    if (e > 0) out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

inline std::uint64_t ipow(std::uint64_t base, unsigned exp) {
  std::uint64_t r = 1;
  while (exp-- > 0) r *= base;
  return r;
}

/// Integer partitions of n, each descending, listed in descending lexicographic order.
inline std::vector<std::vector<unsigned>> partitions(unsigned n) {
  std::vector<std::vector<unsigned>> out;
  std::vector<unsigned> current;
  auto rec = [&](auto&& self, unsigned remaining, unsigned max_part) -> void {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (unsigned part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  rec(rec, n, n);
  return out;
}

}  // namespace detail

/// exp(2 pi i numerator / denominator), exact at multiples of a quarter turn.
inline Complex root_of_unity(std::uint64_t numerator, std::uint64_t denominator) {
  numerator %= denominator;
  if (numerator == 0) return {1.0, 0.0};
  if ((4 * numerator) % denominator == 0) {
    switch ((4 * numerator) / denominator) {
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(numerator) / static_cast<double>(denominator);
  return {std::cos(angle), std::sin(angle)};
}

/// A finite abelian group written as a product of cyclic groups of
/// prime-power order. Parts are grouped by prime (ascending) and sorted
/// descending within a prime, so isomorphic groups compare equal.
class AbelianStructure {
 public:
  AbelianStructure() = default;

  /// Accepts any list of cyclic orders >= 1 and canonicalizes it; Z_6
  /// becomes Z_2 x Z_3 and parts of order 1 are dropped.
  explicit AbelianStructure(std::span<const std::uint64_t> cyclic_orders) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keyed;  // (prime, prime power)
    for (const auto d : cyclic_orders) {
      if (d == 0) throw InvalidArgument("AbelianStructure: cyclic order 0");
      for (const auto& [p, e] : detail::factorize(d)) keyed.emplace_back(p, detail::ipow(p, e));
    }
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first < b.first : a.second > b.second;
    });
    for (const auto& kv : keyed) {
      order_ = detail::checked_mul(order_, kv.second, "AbelianStructure");
      parts_.push_back(kv.second);
    }
  }

  AbelianStructure(std::initializer_list<std::uint64_t> cyclic_orders)
      : AbelianStructure(std::span<const std::uint64_t>(cyclic_orders.begin(), cyclic_orders.size())) {}

  static AbelianStructure cyclic(std::uint64_t n) { return AbelianStructure{n}; }

  /// Parses `4`, `2x2`, `4x3` (parts joined by `x`); `1` is the trivial group.
  static AbelianStructure parse(std::string_view literal) {
    std::vector<std::uint64_t> orders;
    std::size_t pos = 0;
    while (true) {
      const std::size_t end = std::min(literal.find('x', pos), literal.size());
      const std::string_view token = literal.substr(pos, end - pos);
      if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
          token.size() > 18) {
        throw InvalidArgument("invalid group literal '" + std::string(literal) + "'");
      }
      const std::uint64_t d = std::stoull(std::string(token));
      if (d == 0) throw InvalidArgument("invalid group literal '" + std::string(literal) + "': order 0");
      orders.push_back(d);
      if (end == literal.size()) break;
      pos = end + 1;
    }
    return AbelianStructure(orders);
  }

  const std::vector<std::uint64_t>& cyclic_orders() const noexcept { return parts_; }
  std::uint64_t order() const noexcept { return order_; }
  bool is_trivial() const noexcept { return parts_.empty(); }

  std::string to_string() const {
    if (parts_.empty()) return "1";
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      if (i) out += 'x';
      out += std::to_string(parts_[i]);
    }
    return out;
  }

  friend bool operator==(const AbelianStructure&, const AbelianStructure&) = default;

 private:
  std::vector<std::uint64_t> parts_;
  std::uint64_t order_ = 1;
};

/// One structure per isomorphism class of abelian groups of `order`,
/// descending lexicographic on the canonical cyclic parts.
inline std::vector<AbelianStructure> enumerate_structures(std::uint64_t order) {
  if (order == 0) throw InvalidArgument("enumerate_structures: order must be positive");
  std::vector<std::vector<std::uint64_t>> lists{{}};
  for (const auto& [p, e] : detail::factorize(order)) {
    std::vector<std::vector<std::uint64_t>> next;
    for (const auto& prefix : lists) {
      for (const auto& partition : detail::partitions(e)) {
        auto extended = prefix;
        for (const unsigned part : partition) extended.push_back(detail::ipow(p, part));
        next.push_back(std::move(extended));
      }
    }
    lists = std::move(next);
  }
  std::sort(lists.begin(), lists.end(), std::greater<>{});
  std::vector<AbelianStructure> out;
  out.reserve(lists.size());
  for (const auto& l : lists) out.emplace_back(l);
  return out;
}

struct GroupElement {
  std::vector<std::uint64_t> residues;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

inline GroupElement element_of_index(const AbelianStructure& group, std::uint64_t index) {
  if (index >= group.order()) {
    throw InvalidArgument("element_of_index: index " + std::to_string(index) + " out of range for order " +
                          std::to_string(group.order()));
  }
  const auto& parts = group.cyclic_orders();
  GroupElement g{std::vector<std::uint64_t>(parts.size())};
  for (std::size_t j = parts.size(); j-- > 0;) {
    g.residues[j] = index % parts[j];
    index /= parts[j];
  }
  return g;
}

inline std::uint64_t index_of_element(const AbelianStructure& group, const GroupElement& g) {
  const auto& parts = group.cyclic_orders();
  if (g.residues.size() != parts.size()) throw InvalidArgument("index_of_element: wrong number of residues");
  std::uint64_t index = 0;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    if (g.residues[j] >= parts[j]) throw InvalidArgument("index_of_element: residue out of range");
    index = index * parts[j] + g.residues[j];
  }
  return index;
}

/// chi_g(h). The phase is reduced over the lcm of the cyclic orders
/// before a single root-of-unity evaluation.
inline Complex character_value(const AbelianStructure& group, const GroupElement& g, const GroupElement& h) {
  const auto& parts = group.cyclic_orders();
  if (g.residues.size() != parts.size() || h.residues.size() != parts.size()) {
    throw InvalidArgument("character_value: element does not belong to the structure");
  }
  std::uint64_t lcm = 1;
  for (const auto d : parts) lcm = std::lcm(lcm, d);
  std::uint64_t phase = 0;
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const std::uint64_t d = parts[j];
    if (g.residues[j] >= d || h.residues[j] >= d) throw InvalidArgument("character_value: residue out of range");
    const auto term = static_cast<std::uint64_t>((static_cast<UInt128>(g.residues[j]) * h.residues[j]) % d);
    phase = (phase + term * (lcm / d)) % lcm;
  }
  return root_of_unity(phase, lcm);
}

inline Complex character_value(const AbelianStructure& group, std::uint64_t g, std::uint64_t h) {
  return character_value(group, element_of_index(group, g), element_of_index(group, h));
}

struct CharacterTable {
  AbelianStructure group;
  ComplexMatrix entries;  // entries(g, h) = chi_g(h)

  /// U = H / sqrt(order), which is unitary.
  ComplexMatrix normalized() const {
    return entries.scaled(1.0 / std::sqrt(static_cast<double>(group.order())));
  }
};

inline CharacterTable character_table(const AbelianStructure& group, std::uint64_t cap = Limits{}.dense_table) {
  const std::uint64_t s = group.order();
  if (s > cap) {
    throw ResourceLimit("character_table: order " + std::to_string(s) + " exceeds dense cap " + std::to_string(cap) +
                        "; use the factorized transform");
  }
  std::vector<GroupElement> elements;
  elements.reserve(s);
  for (std::uint64_t i = 0; i < s; ++i) elements.push_back(element_of_index(group, i));
  CharacterTable t{group, ComplexMatrix(s, s)};
  for (std::uint64_t g = 0; g < s; ++g)
    for (std::uint64_t h = 0; h < s; ++h) t.entries(g, h) = character_value(group, elements[g], elements[h]);
  return t;
}

}  // namespace gwlp
