#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gwlp/design.hpp"
#include "oracles.hpp"
#include "fixtures.hpp"

namespace gwlp {
namespace {

TEST(ParseDesign, SixteenRunArray) {
  const Design d = testing_fixtures::oa16();
  EXPECT_EQ(d.factors(), 3u);
  EXPECT_EQ(d.level_counts(), (std::vector<std::uint64_t>{4, 4, 4}));
  EXPECT_EQ(d.runs(), 16u);
  EXPECT_EQ(d.size(), 64u);
  EXPECT_EQ(d.distinct_runs(), 16u);
  EXPECT_EQ(d.symbols()[0], (std::vector<std::string>{"0", "a", "b", "c"}));
  const std::vector<LevelIndex> acb{1, 3, 2};  // run (a, c, b) is not in the design
  EXPECT_EQ(d.count(acb), 0u);
  const std::vector<LevelIndex> aca{1, 3, 1};
  EXPECT_EQ(d.count(aca), 1u);
}

TEST(ParseDesign, ColumnLayoutMatchesRows) {
  const Design rows = testing_fixtures::oa16();
  const Design cols = read_design_file(std::string(GWLP_FIXTURE_DIR) + "/oa16_columns.txt");
  EXPECT_EQ(rows, cols);
}

TEST(ParseDesign, RepeatedLinesAccumulate) {
  const Design d = parse_design("a b\na b\na b\n");
  EXPECT_EQ(d.runs(), 3u);
  EXPECT_EQ(d.distinct_runs(), 1u);
  EXPECT_EQ(d.multiplicity(0), 3u);
}

TEST(ParseDesign, Multiplier) {
  const Design d = parse_design("levels: 2 3\n0 0 x5\n1 2\n");
  EXPECT_EQ(d.runs(), 6u);
  EXPECT_EQ(d.multiplicity(0), 5u);
  EXPECT_THROW(parse_design("0 0 x0\n"), ParseError);
}

TEST(ParseDesign, InferredAlphabetsAndReference) {
  const Design d = parse_design("10 b\n2 a\n");
  EXPECT_EQ(d.symbols()[0], (std::vector<std::string>{"2", "10"}));  // numeric order
  EXPECT_EQ(d.symbols()[1], (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.level_counts(), (std::vector<std::uint64_t>{2, 2}));

  const Design r = parse_design("reference: 10 b\n10 b\n2 a\n");
  EXPECT_EQ(r.symbols()[0], (std::vector<std::string>{"10", "2"}));
  EXPECT_EQ(r.symbols()[1], (std::vector<std::string>{"b", "a"}));
}

TEST(ParseDesign, Errors) {
  try {
    parse_design("a b c\na b\n");
    FAIL() << "ragged row accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_design("symbols: 0 1 | 0 1\n0 1\n0 2\n");
    FAIL() << "unknown symbol accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_design("# only a comment\n"), ParseError);
  EXPECT_THROW(parse_design(""), ParseError);
  EXPECT_THROW(parse_design("levels: 2 2\nsymbols: 0 1 2 | 0 1\n0 0\n"), ParseError);
  EXPECT_THROW(parse_design("colour: red\n0 0\n"), ParseError);
  EXPECT_THROW(parse_design("0 0\nlevels: 2 2\n"), ParseError);
  EXPECT_THROW(parse_design("symbols: 0 0 | 1 2\n0 1\n"), ParseError);
}

TEST(SerializeDesign, RoundTripOnCanonicalFiles) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const Design d = oracle::random_mixed_design(rng, 4, {2, 3, 4, 6}, 40, 3);
    const std::string text = serialize_design(d);
    const Design back = parse_design(text);
    EXPECT_EQ(back, d);
    EXPECT_EQ(serialize_design(back), text);
  }
  const Design oa = testing_fixtures::oa16();
  EXPECT_EQ(parse_design(serialize_design(oa)), oa);
}

TEST(Margins, SixteenRunArray) {
  const Design d = testing_fixtures::oa16();
  const auto none = margins(d, FactorSet{});
  EXPECT_EQ(none.cells(), 1u);
  EXPECT_EQ(none.total(), 16u);
  ASSERT_EQ(none.nonzero().size(), 1u);
  EXPECT_EQ(none.nonzero()[0].count, 16u);

  EXPECT_EQ(margins(d, FactorSet{0}).dense(), (std::vector<std::uint64_t>{4, 4, 4, 4}));
  EXPECT_EQ(margins(d, FactorSet{0, 1}).dense(), std::vector<std::uint64_t>(16, 1));
  for (const auto subset : {FactorSet{0, 2}, FactorSet{1, 2}})
    EXPECT_EQ(margins(d, subset).dense(), std::vector<std::uint64_t>(16, 1));
  EXPECT_EQ(margins(d, FactorSet::all(3)).dense(), d.dense_counts());
  const std::vector<LevelIndex> combo{2, 3};
  EXPECT_EQ(margins(d, FactorSet{0, 2}).count(combo), 1u);
  EXPECT_THROW(margins(d, FactorSet{3}), InvalidArgument);
}

TEST(Margins, SumToNAndMarginalizeConsistently) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 30; ++trial) {
    const Design d = oracle::random_mixed_design(rng, 4, {2, 3, 4, 5}, 60, 3);
    const std::size_t k = d.factors();
    for (std::uint64_t big = 0; big < (1u << k); ++big) {
      const auto fine = margins(d, FactorSet(big));
      EXPECT_EQ(fine.total(), d.runs());
      // Every subset of `big` is the marginalization of `fine`.
      for (std::uint64_t small = big;; small = (small - 1) & big) {
        const auto coarse = margins(d, FactorSet(small));
        std::vector<std::uint64_t> summed(coarse.cells(), 0);
        for (const auto& e : fine.nonzero()) {
          std::uint64_t key = e.cell;
          std::vector<std::uint64_t> digits(fine.factors().size());
          for (std::size_t i = digits.size(); i-- > 0;) {
            digits[i] = key % fine.sizes()[i];
            key /= fine.sizes()[i];
          }
          std::uint64_t target = 0;
          for (std::size_t i = 0; i < digits.size(); ++i)
            if (FactorSet(small).contains(fine.factors()[i])) target = target * fine.sizes()[i] + digits[i];
          summed[target] += e.count;
        }
        EXPECT_EQ(summed, coarse.dense());
        if (small == 0) break;
      }
    }
  }
}

TEST(Design, DensifyCap) {
  std::mt19937_64 rng(3);
  const Design d = oracle::random_design(rng, {12, 12, 12, 12, 12, 12}, 10, 1);
  EXPECT_THROW(d.dense_counts(), ResourceLimit);
  EXPECT_EQ(d.runs(), 10u);
}

TEST(RelabelLevels, Examples) {
  const Design d = testing_fixtures::oa16();
  const std::vector<LevelIndex> id{0, 1, 2, 3};
  const std::vector<std::vector<LevelIndex>> identity{id, id, id};
  EXPECT_EQ(relabel_levels(d, identity), d);

  const std::vector<LevelIndex> swap{1, 0, 2, 3};
  const std::vector<std::vector<LevelIndex>> swaps{swap, id, swap};
  EXPECT_EQ(relabel_levels(relabel_levels(d, swaps), swaps), d);

  const std::vector<LevelIndex> cycle{1, 2, 3, 0};  // 0 -> a -> b -> c -> 0
  const std::vector<std::vector<LevelIndex>> cycled{cycle, id, id};
  const Design r = relabel_levels(d, cycled);
  EXPECT_EQ(r.runs(), 16u);
  EXPECT_EQ(margins(r, FactorSet{0}).dense(), (std::vector<std::uint64_t>{4, 4, 4, 4}));
  EXPECT_EQ(r.symbols()[0], (std::vector<std::string>{"c", "0", "a", "b"}));
  EXPECT_NE(r, d);
}

TEST(RelabelLevels, PreservesMultiplicities) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const Design d = oracle::random_mixed_design(rng, 3, {2, 3, 4}, 50, 3);
    std::vector<std::vector<LevelIndex>> perms;
    for (const auto s : d.level_counts()) {
      std::vector<LevelIndex> p(s);
      std::iota(p.begin(), p.end(), 0);
      std::shuffle(p.begin(), p.end(), rng);
      perms.push_back(p);
    }
    const Design r = relabel_levels(d, perms);
    EXPECT_EQ(r.runs(), d.runs());
    std::vector<std::uint64_t> a, b;
    for (std::size_t i = 0; i < d.distinct_runs(); ++i) a.push_back(d.multiplicity(i));
    for (std::size_t i = 0; i < r.distinct_runs(); ++i) b.push_back(r.multiplicity(i));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
  }
}

TEST(RelabelLevels, RejectsNonBijections) {
  const Design d = testing_fixtures::oa16();
  const std::vector<LevelIndex> id{0, 1, 2, 3};
  const std::vector<LevelIndex> bad{0, 0, 2, 3};
  const std::vector<std::vector<LevelIndex>> perms{bad, id, id};
  EXPECT_THROW(relabel_levels(d, perms), InvalidArgument);
  const std::vector<std::vector<LevelIndex>> short_list{id, id};
  EXPECT_THROW(relabel_levels(d, short_list), InvalidArgument);
}

}  // namespace
}  // namespace gwlp
