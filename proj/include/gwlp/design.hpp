#pragma once

// Factorial designs as multisets of runs, their marginal count tables, and
// the plain-text design file format.
//
// File format:
//   # comment
//   levels: 4 4 4                      (optional)
//   symbols: 0 a b c | 0 a b c | ...   (optional; first symbol = reference level)
//   reference: 0 0 a                   (optional; overrides the reference level)
//   layout: columns                    (optional; one line per factor)
//   0 a a x3                           (one run per line, optional multiplier)

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwlp/common.hpp"

namespace gwlp {

using LevelIndex = std::uint32_t;

/// A subset of factor positions (0-based) as a bitmask; at most 64 factors.
class FactorSet {
 public:
  constexpr FactorSet() = default;
  constexpr explicit FactorSet(std::uint64_t bits) : bits_(bits) {}
  FactorSet(std::initializer_list<std::size_t> factors) {
    for (const auto f : factors) insert(f);
  }

  static FactorSet of(std::span<const std::size_t> factors) {
    FactorSet out;
    for (const auto f : factors) out.insert(f);
    return out;
  }

  /// {0, ..., k-1}
  static FactorSet all(std::size_t k) {
    if (k > 64) throw InvalidArgument("FactorSet: more than 64 factors");
    return FactorSet(k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1);
  }

  void insert(std::size_t factor) {
    if (factor >= 64) throw InvalidArgument("FactorSet: factor index " + std::to_string(factor) + " >= 64");
    bits_ |= std::uint64_t{1} << factor;
  }

  constexpr bool contains(std::size_t factor) const { return factor < 64 && ((bits_ >> factor) & 1u); }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool is_subset_of(FactorSet other) const { return (bits_ & ~other.bits_) == 0; }

  std::vector<std::size_t> members() const {
    std::vector<std::size_t> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(b)));
    return out;
  }

  friend constexpr bool operator==(FactorSet, FactorSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct WeightedRun {
  std::vector<LevelIndex> levels;
  std::uint64_t multiplicity = 1;
};

/// A multiset of runs over per-factor level alphabets. Level index 0 of each
/// factor is its reference level. Distinct runs are kept in Yates order
/// (lexicographic, factor 0 most significant) with multiplicities >= 1.
class Design {
 public:
  Design() = default;

  Design(std::vector<std::vector<std::string>> symbols, std::span<const WeightedRun> runs)
      : symbols_(std::move(symbols)) {
    init_levels();
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keyed;
    keyed.reserve(runs.size());
    for (const auto& r : runs) {
      if (r.multiplicity == 0) continue;
      keyed.emplace_back(flat_index_of(r.levels), r.multiplicity);
    }
    assign_sorted(std::move(keyed));
  }

  /// Dense counts over the Yates-ordered product of the level alphabets.
  static Design from_dense(std::vector<std::vector<std::string>> symbols, std::span<const std::uint64_t> counts) {
    Design d;
    d.symbols_ = std::move(symbols);
    d.init_levels();
    if (counts.size() != d.size_) {
      throw InvalidArgument("Design::from_dense: " + std::to_string(counts.size()) + " counts for " +
                            std::to_string(d.size_) + " cells");
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> keyed;
    for (std::uint64_t i = 0; i < counts.size(); ++i)
      if (counts[i] > 0) keyed.emplace_back(i, counts[i]);
    d.assign_sorted(std::move(keyed));
    return d;
  }

  /// Alphabets "0", "1", ..., "s_i - 1".
  static std::vector<std::vector<std::string>> numeric_symbols(std::span<const std::uint64_t> level_counts) {
    std::vector<std::vector<std::string>> out;
    for (const auto s : level_counts) {
      std::vector<std::string> alphabet;
      for (std::uint64_t l = 0; l < s; ++l) alphabet.push_back(std::to_string(l));
      out.push_back(std::move(alphabet));
    }
    return out;
  }

  std::size_t factors() const noexcept { return symbols_.size(); }
  const std::vector<std::uint64_t>& level_counts() const noexcept { return level_counts_; }
  const std::vector<std::vector<std::string>>& symbols() const noexcept { return symbols_; }

  /// N, counting multiplicity.
  std::uint64_t runs() const noexcept { return total_; }
  /// s, the product of the level counts.
  std::uint64_t size() const noexcept { return size_; }
  std::size_t distinct_runs() const noexcept { return flat_.size(); }

  std::span<const LevelIndex> run(std::size_t i) const { return {cells_.data() + i * factors(), factors()}; }
  std::uint64_t multiplicity(std::size_t i) const { return mult_[i]; }
  std::uint64_t flat_index(std::size_t i) const { return flat_[i]; }

  /// O(g) for a level combination.
  std::uint64_t count(std::span<const LevelIndex> levels) const {
    const std::uint64_t key = flat_index_of(levels);
    const auto it = std::lower_bound(flat_.begin(), flat_.end(), key);
    return (it != flat_.end() && *it == key) ? mult_[static_cast<std::size_t>(it - flat_.begin())] : 0;
  }

  std::vector<std::uint64_t> dense_counts(std::uint64_t cap = Limits{}.densify) const {
    if (size_ > cap) {
      throw ResourceLimit("dense_counts: s = " + std::to_string(size_) + " exceeds densification cap " +
                          std::to_string(cap));
    }
    std::vector<std::uint64_t> out(size_, 0);
    for (std::size_t i = 0; i < flat_.size(); ++i) out[flat_[i]] = mult_[i];
    return out;
  }

  /// Yates index of a level combination; validates bounds.
  std::uint64_t flat_index_of(std::span<const LevelIndex> levels) const {
    if (levels.size() != factors()) {
      throw InvalidArgument("run has " + std::to_string(levels.size()) + " levels, design has " +
                            std::to_string(factors()) + " factors");
    }
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (levels[i] >= level_counts_[i]) {
        throw InvalidArgument("level index " + std::to_string(levels[i]) + " out of range for factor " +
                              std::to_string(i + 1));
      }
      key = key * level_counts_[i] + levels[i];
    }
    return key;
  }

  /// Sum of O(g)^2.
  UInt128 sum_of_squared_counts() const {
    UInt128 acc = 0;
    for (const auto m : mult_) acc += static_cast<UInt128>(m) * m;
    return acc;
  }

  friend bool operator==(const Design& a, const Design& b) {
    return a.symbols_ == b.symbols_ && a.flat_ == b.flat_ && a.mult_ == b.mult_;
  }

 private:
  void init_levels() {
    level_counts_.clear();
    size_ = 1;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      const auto& alphabet = symbols_[i];
      if (alphabet.empty()) throw InvalidArgument("factor " + std::to_string(i + 1) + " has no levels");
      auto sorted = alphabet;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidArgument("factor " + std::to_string(i + 1) + " has duplicate level symbols");
      }
      level_counts_.push_back(alphabet.size());
      size_ = detail::checked_mul(size_, alphabet.size(), "Design");
    }
  }

  void assign_sorted(std::vector<std::pair<std::uint64_t, std::uint64_t>> keyed) {
    std::sort(keyed.begin(), keyed.end());
    flat_.clear();
    mult_.clear();
    total_ = 0;
    for (const auto& [key, m] : keyed) {
      if (!flat_.empty() && flat_.back() == key) {
        mult_.back() += m;
      } else {
        flat_.push_back(key);
        mult_.push_back(m);
      }
      total_ += m;
    }
    const std::size_t k = factors();
    cells_.assign(flat_.size() * k, 0);
    for (std::size_t r = 0; r < flat_.size(); ++r) {
      std::uint64_t key = flat_[r];
      for (std::size_t i = k; i-- > 0;) {
        cells_[r * k + i] = static_cast<LevelIndex>(key % level_counts_[i]);
        key /= level_counts_[i];
      }
    }
  }

  std::vector<std::vector<std::string>> symbols_;
  std::vector<std::uint64_t> level_counts_;
  std::uint64_t size_ = 1;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> flat_;
  std::vector<std::uint64_t> mult_;
  std::vector<LevelIndex> cells_;
};

/// Counts of runs agreeing on a subset K of factors. Only nonzero cells
/// are stored, keyed by the Yates index over the factors of K.
class MarginTable {
 public:
  struct Entry {
    std::uint64_t cell;
    std::uint64_t count;
  };

  MarginTable(std::vector<std::size_t> factors, std::vector<std::uint64_t> sizes, std::vector<Entry> entries)
      : factors_(std::move(factors)), sizes_(std::move(sizes)), entries_(std::move(entries)) {
    cells_ = 1;
    for (const auto s : sizes_) cells_ = detail::checked_mul(cells_, s, "MarginTable");
  }

  const std::vector<std::size_t>& factors() const noexcept { return factors_; }
  const std::vector<std::uint64_t>& sizes() const noexcept { return sizes_; }
  std::uint64_t cells() const noexcept { return cells_; }
  std::span<const Entry> nonzero() const noexcept { return entries_; }

  /// c at a level combination listed in the order of `factors()`.
  std::uint64_t count(std::span<const LevelIndex> combination) const {
    if (combination.size() != sizes_.size()) throw InvalidArgument("MarginTable::count: wrong combination length");
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < combination.size(); ++i) {
      if (combination[i] >= sizes_[i]) throw InvalidArgument("MarginTable::count: level out of range");
      key = key * sizes_[i] + combination[i];
    }
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                     [](const Entry& e, std::uint64_t k) { return e.cell < k; });
    return (it != entries_.end() && it->cell == key) ? it->count : 0;
  }

  std::uint64_t total() const {
    std::uint64_t acc = 0;
    for (const auto& e : entries_) acc += e.count;
    return acc;
  }

  UInt128 sum_of_squares() const {
    UInt128 acc = 0;
    for (const auto& e : entries_) acc += static_cast<UInt128>(e.count) * e.count;
    return acc;
  }

  std::vector<std::uint64_t> dense(std::uint64_t cap = Limits{}.densify) const {
    if (cells_ > cap) throw ResourceLimit("MarginTable::dense: " + std::to_string(cells_) + " cells exceed cap");
    std::vector<std::uint64_t> out(cells_, 0);
    for (const auto& e : entries_) out[e.cell] = e.count;
    return out;
  }

 private:
  std::vector<std::size_t> factors_;
  std::vector<std::uint64_t> sizes_;
  std::uint64_t cells_ = 1;
  std::vector<Entry> entries_;
};

inline MarginTable margins(const Design& design, FactorSet subset) {
  const auto members = subset.members();
  std::vector<std::uint64_t> sizes;
  for (const auto f : members) {
    if (f >= design.factors()) {
      throw InvalidArgument("margins: factor " + std::to_string(f + 1) + " not in design with " +
                            std::to_string(design.factors()) + " factors");
    }
    sizes.push_back(design.level_counts()[f]);
  }
  std::vector<MarginTable::Entry> keyed;
  keyed.reserve(design.distinct_runs());
  for (std::size_t r = 0; r < design.distinct_runs(); ++r) {
    const auto levels = design.run(r);
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < members.size(); ++i) key = key * sizes[i] + levels[members[i]];
    keyed.push_back({key, design.multiplicity(r)});
  }
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.cell < b.cell; });
  std::vector<MarginTable::Entry> merged;
  for (const auto& e : keyed) {
    if (!merged.empty() && merged.back().cell == e.cell) {
      merged.back().count += e.count;
    } else {
      merged.push_back(e);
    }
  }
  return MarginTable(members, std::move(sizes), std::move(merged));
}

/// Re-indexes levels: perms[i][old] = new for factor i. Symbols travel with
/// their levels, so the reference level (index 0) generally changes.
inline Design relabel_levels(const Design& design, std::span<const std::vector<LevelIndex>> perms) {
  const std::size_t k = design.factors();
  if (perms.size() != k) throw InvalidArgument("relabel_levels: need one permutation per factor");
  auto symbols = design.symbols();
  for (std::size_t i = 0; i < k; ++i) {
    const auto& p = perms[i];
    const std::uint64_t s = design.level_counts()[i];
    if (p.size() != s) throw InvalidArgument("relabel_levels: permutation " + std::to_string(i + 1) + " has wrong size");
    std::vector<bool> seen(s, false);
    for (const auto v : p) {
      if (v >= s || seen[v]) throw InvalidArgument("relabel_levels: permutation " + std::to_string(i + 1) + " is not a bijection");
      seen[v] = true;
    }
    for (std::uint64_t old = 0; old < s; ++old) symbols[i][p[old]] = design.symbols()[i][old];
  }
  std::vector<WeightedRun> runs;
  runs.reserve(design.distinct_runs());
  for (std::size_t r = 0; r < design.distinct_runs(); ++r) {
    const auto levels = design.run(r);
    WeightedRun w{std::vector<LevelIndex>(k), design.multiplicity(r)};
    for (std::size_t i = 0; i < k; ++i) w.levels[i] = perms[i][levels[i]];
    runs.push_back(std::move(w));
  }
  return Design(std::move(symbols), runs);
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline std::optional<std::uint64_t> parse_uint(std::string_view token) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
  return v;
}

inline std::optional<std::uint64_t> parse_multiplier(std::string_view token) {
  if (token.size() < 2 || token.front() != 'x') return std::nullopt;
  return parse_uint(token.substr(1));
}

/// Symbols sort numerically when every symbol of the factor is an integer,
/// lexicographically otherwise.
inline void sort_symbols(std::vector<std::string>& alphabet) {
  const bool numeric = std::all_of(alphabet.begin(), alphabet.end(),
                                   [](const std::string& s) { return parse_uint(s).has_value(); });
  if (numeric) {
    std::sort(alphabet.begin(), alphabet.end(),
              [](const std::string& a, const std::string& b) { return *parse_uint(a) < *parse_uint(b); });
  } else {
    std::sort(alphabet.begin(), alphabet.end());
  }
}

}  // namespace detail

inline Design parse_design(std::string_view text) {
  std::optional<std::vector<std::uint64_t>> levels;
  std::optional<std::vector<std::vector<std::string>>> symbols;
  std::optional<std::vector<std::string>> reference;
  std::size_t reference_line = 0;
  bool columns = false;

  struct Row {
    std::size_t line;
    std::vector<std::string> tokens;
    std::uint64_t multiplicity;
  };
  std::vector<Row> rows;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = detail::split_ws(line);
    if (tokens.empty()) continue;

    const auto head = tokens.front();
    if (head.size() > 1 && head.back() == ':') {
      if (!rows.empty()) throw ParseError(line_no, "header '" + std::string(head) + "' after the first run");
      const auto key = head.substr(0, head.size() - 1);
      const std::vector<std::string_view> args(tokens.begin() + 1, tokens.end());
      if (key == "levels") {
        std::vector<std::uint64_t> v;
        for (const auto a : args) {
          const auto n = detail::parse_uint(a);
          if (!n || *n == 0) throw ParseError(line_no, "levels: expected positive integers");
          v.push_back(*n);
        }
        if (v.empty()) throw ParseError(line_no, "levels: empty");
        levels = std::move(v);
      } else if (key == "symbols") {
        std::vector<std::vector<std::string>> v(1);
        for (const auto a : args) {
          if (a == "|") {
            v.emplace_back();
          } else {
            v.back().emplace_back(a);
          }
        }
        for (const auto& alphabet : v)
          if (alphabet.empty()) throw ParseError(line_no, "symbols: empty alphabet");
        symbols = std::move(v);
      } else if (key == "reference") {
        reference = std::vector<std::string>(args.begin(), args.end());
        reference_line = line_no;
      } else if (key == "layout") {
        if (args.size() != 1 || (args[0] != "columns" && args[0] != "rows")) {
          throw ParseError(line_no, "layout: expected 'rows' or 'columns'");
        }
        columns = args[0] == "columns";
      } else {
        throw ParseError(line_no, "unknown header '" + std::string(key) + "'");
      }
      continue;
    }

    Row row{line_no, {}, 1};
    std::size_t n = tokens.size();
    if (!columns && n >= 2) {
      // A trailing x<m> is a multiplier only when dropping it leaves a full run.
      const std::size_t expected =
          symbols ? symbols->size() : levels ? levels->size() : rows.empty() ? 0 : rows.front().tokens.size();
      const auto m = detail::parse_multiplier(tokens.back());
      if (m && (expected == 0 || n == expected + 1)) {
        if (*m == 0) throw ParseError(line_no, "multiplier x0");
        row.multiplicity = *m;
        --n;
      }
    }
    for (std::size_t i = 0; i < n; ++i) row.tokens.emplace_back(tokens[i]);
    rows.push_back(std::move(row));
  }

  if (columns) {
    // Transpose a k x N block into N runs.
    if (rows.empty()) throw ParseError(0, "design has no runs");
    const std::size_t runs = rows.front().tokens.size();
    for (const auto& r : rows)
      if (r.tokens.size() != runs) {
        throw ParseError(r.line, "column layout: expected " + std::to_string(runs) + " symbols, found " +
                                     std::to_string(r.tokens.size()));
      }
    std::vector<Row> transposed;
    for (std::size_t j = 0; j < runs; ++j) {
      Row t{rows.front().line, {}, 1};
      for (const auto& r : rows) t.tokens.push_back(r.tokens[j]);
      transposed.push_back(std::move(t));
    }
    rows = std::move(transposed);
  }

  if (rows.empty()) throw ParseError(0, "design has no runs");
  const std::size_t k = symbols ? symbols->size() : levels ? levels->size() : rows.front().tokens.size();
  if (levels && levels->size() != k) throw ParseError(0, "levels: header lists " + std::to_string(levels->size()) +
                                                            " factors, symbols lists " + std::to_string(k));
  for (const auto& r : rows)
    if (r.tokens.size() != k) {
      throw ParseError(r.line, "expected " + std::to_string(k) + " symbols, found " + std::to_string(r.tokens.size()));
    }

  std::vector<std::vector<std::string>> alphabets;
  if (symbols) {
    alphabets = *symbols;
    if (levels) {
      for (std::size_t i = 0; i < k; ++i)
        if ((*levels)[i] != alphabets[i].size()) {
          throw ParseError(0, "factor " + std::to_string(i + 1) + ": levels says " + std::to_string((*levels)[i]) +
                                  " but symbols lists " + std::to_string(alphabets[i].size()));
        }
    }
  } else if (levels) {
    alphabets = Design::numeric_symbols(*levels);
  } else {
    alphabets.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      for (const auto& r : rows) alphabets[i].push_back(r.tokens[i]);
      std::sort(alphabets[i].begin(), alphabets[i].end());
      alphabets[i].erase(std::unique(alphabets[i].begin(), alphabets[i].end()), alphabets[i].end());
      detail::sort_symbols(alphabets[i]);
    }
  }

  if (reference) {
    if (reference->size() != k) throw ParseError(reference_line, "reference: expected one symbol per factor");
    for (std::size_t i = 0; i < k; ++i) {
      auto& a = alphabets[i];
      const auto it = std::find(a.begin(), a.end(), (*reference)[i]);
      if (it == a.end()) throw ParseError(reference_line, "reference: unknown symbol '" + (*reference)[i] + "'");
      std::rotate(a.begin(), it, it + 1);
    }
  }

  std::vector<std::map<std::string, LevelIndex, std::less<>>> lookup(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t l = 0; l < alphabets[i].size(); ++l) lookup[i][alphabets[i][l]] = static_cast<LevelIndex>(l);

  std::vector<WeightedRun> runs;
  runs.reserve(rows.size());
  for (const auto& r : rows) {
    WeightedRun w{std::vector<LevelIndex>(k), r.multiplicity};
    for (std::size_t i = 0; i < k; ++i) {
      const auto it = lookup[i].find(r.tokens[i]);
      if (it == lookup[i].end()) {
        throw ParseError(r.line, "unknown symbol '" + r.tokens[i] + "' for factor " + std::to_string(i + 1));
      }
      w.levels[i] = it->second;
    }
    runs.push_back(std::move(w));
  }
  try {
    return Design(std::move(alphabets), runs);
  } catch (const InvalidArgument& e) {
    throw ParseError(0, e.what());
  }
}

inline Design read_design_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open design file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_design(buf.str());
}

/// Canonical text: explicit levels and symbols headers, runs in Yates order.
inline std::string serialize_design(const Design& design) {
  std::ostringstream out;
  out << "levels:";
  for (const auto s : design.level_counts()) out << ' ' << s;
  out << "\nsymbols:";
  for (std::size_t i = 0; i < design.factors(); ++i) {
    if (i) out << " |";
    for (const auto& sym : design.symbols()[i]) out << ' ' << sym;
  }
  out << '\n';
  for (std::size_t r = 0; r < design.distinct_runs(); ++r) {
    const auto levels = design.run(r);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (i) out << ' ';
      out << design.symbols()[i][levels[i]];
    }
    if (design.multiplicity(r) > 1) out << " x" << design.multiplicity(r);
    out << '\n';
  }
  return out.str();
}

}  // namespace gwlp
