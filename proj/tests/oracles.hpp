#pragma once

// Test-only reference computations. These evaluate definitions directly
// (sums over runs of products of single-factor characters, Gaussian
// elimination) and never go through the factorized transform or the
// margin route they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gwlp/gwlp.hpp"

namespace gwlp::oracle {

/// chi_g(D) = sum over runs h of O(h) prod_i chi_{g_i}(h_i), straight from the definition.
inline std::vector<Complex> brute_force_jchar(const Design& design, const StructureAssignment& assignment) {
  const std::size_t k = design.factors();
  const auto& counts = design.level_counts();
  std::vector<Complex> out(design.size());
  std::vector<std::uint64_t> g_digits(k);
  for (std::uint64_t g = 0; g < design.size(); ++g) {
    std::uint64_t rest = g;
    for (std::size_t i = k; i-- > 0;) {
      g_digits[i] = rest % counts[i];
      rest /= counts[i];
    }
    Complex acc{};
    for (std::size_t r = 0; r < design.distinct_runs(); ++r) {
      const auto h = design.run(r);
      Complex term = static_cast<double>(design.multiplicity(r));
      for (std::size_t i = 0; i < k; ++i) term *= character_value(assignment[i], g_digits[i], h[i]);
      acc += term;
    }
    out[g] = acc;
  }
  return out;
}

/// A_j by direct summation over all s characters.
inline std::vector<double> brute_force_gwlp(const Design& design, const StructureAssignment& assignment) {
  const auto chi = brute_force_jchar(design, assignment);
  std::vector<double> a(design.factors() + 1, 0.0);
  for (std::uint64_t g = 0; g < chi.size(); ++g) a[weight(design.level_counts(), g)] += std::norm(chi[g]);
  const double n2 = static_cast<double>(design.runs()) * static_cast<double>(design.runs());
  for (auto& x : a) x /= n2;
  return a;
}

/// Rank by Gaussian elimination with partial pivoting.
inline std::size_t rank(ComplexMatrix m, double tol = 1e-9) {
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    std::size_t pivot = r;
    for (std::size_t i = r; i < m.rows(); ++i)
      if (std::abs(m(i, c)) > std::abs(m(pivot, c))) pivot = i;
    if (std::abs(m(pivot, c)) <= tol) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(pivot, j));
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == r) continue;
      const Complex f = m(i, c) / m(r, c);
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
    }
    ++r;
  }
  return r;
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> dist;
  ComplexMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = {dist(rng), dist(rng)};
  return m;
}

inline ComplexVector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> dist;
  ComplexVector v(n);
  for (auto& x : v) x = {dist(rng), dist(rng)};
  return v;
}

/// Random design from `draws` uniform runs (repeats merge), each draw with
/// multiplicity in [1, max_multiplicity].
inline Design random_design(std::mt19937_64& rng, const std::vector<std::uint64_t>& levels, std::size_t draws,
                            std::uint64_t max_multiplicity) {
  std::vector<WeightedRun> runs;
  std::uniform_int_distribution<std::uint64_t> mult(1, max_multiplicity);
  for (std::size_t d = 0; d < draws; ++d) {
    WeightedRun r{std::vector<LevelIndex>(levels.size()), mult(rng)};
    for (std::size_t i = 0; i < levels.size(); ++i)
      r.levels[i] = static_cast<LevelIndex>(std::uniform_int_distribution<std::uint64_t>(0, levels[i] - 1)(rng));
    runs.push_back(std::move(r));
  }
  return Design(Design::numeric_symbols(levels), runs);
}

/// Random design with k in [1, max_k], s_i from `choices`, 1 <= N <= max_n,
/// distinct runs each with multiplicity in [1, max_multiplicity].
inline Design random_mixed_design(std::mt19937_64& rng, std::size_t max_k, const std::vector<std::uint64_t>& choices,
                                  std::uint64_t max_n, std::uint64_t max_multiplicity, std::uint64_t max_s = 0) {
  while (true) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, max_k)(rng);
    std::vector<std::uint64_t> levels;
    std::uint64_t s = 1;
    for (std::size_t i = 0; i < k; ++i) {
      levels.push_back(choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)]);
      s *= levels.back();
    }
    if (max_s != 0 && s > max_s) continue;
    const std::uint64_t target =
        std::uniform_int_distribution<std::uint64_t>(1, std::min(max_n, s * max_multiplicity))(rng);
    std::vector<std::uint64_t> counts(s, 0);
    std::uniform_int_distribution<std::uint64_t> cell(0, s - 1);
    std::uint64_t n = 0;
    while (n < target) {
      const std::uint64_t c = cell(rng);
      const std::uint64_t room = max_multiplicity - counts[c];
      if (room == 0) continue;
      const std::uint64_t add = std::min(std::uniform_int_distribution<std::uint64_t>(1, room)(rng), target - n);
      counts[c] += add;
      n += add;
    }
    return Design::from_dense(Design::numeric_symbols(levels), counts);
  }
}

inline Design full_factorial(const std::vector<std::uint64_t>& levels) {
  std::uint64_t s = 1;
  for (const auto l : levels) s *= l;
  return Design::from_dense(Design::numeric_symbols(levels), std::vector<std::uint64_t>(s, 1));
}

}  // namespace gwlp::oracle
