#include <gtest/gtest.h>

#include "treeint/error.h"
#include "treeint/subsets.h"

namespace treeint {
namespace {

TEST(Binomial, SmallValues) {
  EXPECT_EQ(binomial(0, 0), 1u);
  EXPECT_EQ(binomial(5, 2), 10u);
  EXPECT_EQ(binomial(5, 6), 0u);
  EXPECT_EQ(binomial(62, 31), 465428353255261088ull);
  EXPECT_THROW(binomial(70, 35), LimitError);
}

TEST(Binomial, RealIsSymmetric) {
  for (int n = 0; n <= 40; ++n) {
    for (int k = 0; k <= n; ++k) EXPECT_EQ(binomial_real(n, k), binomial_real(n, n - k));
  }
}

TEST(Combinations, ColexRankIsABijection) {
  for (int n = 1; n <= 9; ++n) {
    for (int k = 1; k <= n; ++k) {
      const auto subsets = all_subsets(n, k);
      ASSERT_EQ(subsets.size(), binomial(n, k));
      std::vector<bool> hit(subsets.size(), false);
      for (const auto& s : subsets) {
        const auto r = colex_rank(s);
        ASSERT_LT(r, subsets.size());
        EXPECT_FALSE(hit[r]);
        hit[r] = true;
      }
    }
  }
}

TEST(Combinations, LexicographicOrder) {
  const auto subsets = all_subsets(4, 2);
  const std::vector<Subset> expect{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(subsets, expect);
}

TEST(ScoreTable, DenseAndSparseAgree) {
  ScoreTable dense(8, 3);
  ScoreTable sparse(ScoreTable::kDenseFeatureLimit + 1, 3);
  EXPECT_TRUE(dense.dense());
  EXPECT_FALSE(sparse.dense());
  double v = 0.5;
  for (const auto& s : all_subsets(8, 3)) {
    dense.add(s, v);
    sparse.add(s, v);
    v = -v * 1.1;
  }
  for (const auto& s : all_subsets(8, 3)) EXPECT_EQ(dense.get(s), sparse.get(s));
  EXPECT_DOUBLE_EQ(dense.sum(), sparse.sum());
  EXPECT_EQ(dense.nonzero_entries(), sparse.nonzero_entries());
}

TEST(ScoreTable, FloorZeroesSmallEntries) {
  ScoreTable t(4, 1);
  const int a[1] = {0};
  const int b[1] = {2};
  t.add(a, 1e-15);
  t.add(b, 0.25);
  t.apply_floor(1e-13);
  EXPECT_EQ(t.get(a), 0.0);
  EXPECT_EQ(t.get(b), 0.25);
  const auto nz = t.nonzero_entries();
  ASSERT_EQ(nz.size(), 1u);
  EXPECT_EQ(nz[0].first, Subset{2});
}

}  // namespace
}  // namespace treeint
