#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "test_util.h"
#include "treeint/engine.h"
#include "treeint/error.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"

namespace treeint {
namespace {

using testing::load_fixture;
using testing::max_abs_diff;

Ensemble random_model(int n, int depth, int leaves, std::uint64_t seed,
                      int trees = 1) {
  TreeSpec spec;
  spec.n_features = n;
  spec.max_depth = depth;
  spec.leaves = leaves;
  return random_ensemble(spec, trees, seed);
}

// Largest deviation from the oracle relative to max(|oracle|, 1e-12/rel).
double worst_ratio(const ScoreTable& engine, const ScoreTable& oracle, double rel,
                   double abs_floor) {
  double worst = 0.0;
  oracle.for_each_dense([&](std::span<const int> s, double o) {
    const double dev = std::abs(engine.get(s) - o);
    worst = std::max(worst, dev / std::max(rel * std::abs(o), abs_floor));
  });
  return worst;
}

TEST(Explain, DepthOneWorkedExample) {
  const Ensemble e = load_fixture("depth1.json");
  const std::vector<double> x{0.2};
  const int s[1] = {0};
  const InteractionResult sv = explain_sv(e, x);
  const InteractionResult sii = explain_interactions(e, x, ExplainConfig{});
  EXPECT_DOUBLE_EQ(sv.scores.get(s), 0.5);
  EXPECT_DOUBLE_EQ(sii.scores.get(s), 0.5);
  EXPECT_DOUBLE_EQ(sv.baseline, 0.5);
  EXPECT_DOUBLE_EQ(sv.prediction, 1.0);
  ExplainConfig banzhaf;
  banzhaf.index.kind = poly::IndexKind::kBanzhaf;
  EXPECT_DOUBLE_EQ(explain_interactions(e, x, banzhaf).scores.get(s), 0.5);
}

TEST(Explain, SingleLeafHasNoAttribution) {
  Ensemble e;
  e.n_features = 3;
  TreeModel leaf;
  leaf.left = leaf.right = leaf.feature = {kNoNode};
  leaf.threshold = {0.0};
  leaf.count = {10.0};
  leaf.value = {4.5};
  e.trees.push_back(leaf);
  const std::vector<double> x{0.1, 0.2, 0.3};
  const InteractionResult r = explain_sv(e, x);
  EXPECT_EQ(r.baseline, 4.5);
  for (int i = 0; i < 3; ++i) {
    const int s[1] = {i};
    EXPECT_EQ(r.scores.get(s), 0.0);
  }
  ExplainConfig c;
  c.order = 2;
  EXPECT_EQ(explain_interactions(e, x, c).scores.sum(), 0.0);
}

TEST(Explain, MatchesOracleOnSmallTree) {
  const Ensemble e = random_model(6, 4, 12, 77);
  std::mt19937_64 rng(77);
  for (const auto& x : random_instances(6, 3, rng)) {
    ExplainConfig c;
    c.order = 2;
    const InteractionResult r = explain_interactions(e, x, c);
    const InteractionResult o = oracle::brute_all(e, x, 2);
    EXPECT_LE(worst_ratio(r.scores, o.scores, 1e-8, 1e-12), 1.0);
  }
}

TEST(Explain, MatchesOracleAcrossOrders) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const int n = 4 + static_cast<int>(seed % 4);
    const Ensemble e = random_model(n, 6, 30, seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(n, 1, rng)[0];
    const Explainer explainer(e);
    for (int s = 1; s <= 4; ++s) {
      ExplainConfig c;
      c.order = s;
      const InteractionResult r = explainer.explain(x, c);
      const InteractionResult o = oracle::brute_all(e, x, s);
      EXPECT_LE(worst_ratio(r.scores, o.scores, 1e-8, 1e-12), 1.0)
          << "seed " << seed << " order " << s;
      EXPECT_NEAR(r.baseline, o.baseline, 1e-12);
      EXPECT_EQ(r.prediction, predict(e, x));
    }
  }
}

TEST(Explain, OrderOneAgreesWithShapleyPath) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Ensemble e = random_model(7, 6, 40, 100 + seed, 3);
    std::mt19937_64 rng(seed);
    const Explainer explainer(e);
    for (const auto& x : random_instances(7, 3, rng)) {
      const InteractionResult a = explainer.explain(x, ExplainConfig{});
      const InteractionResult b = explainer.explain_sv(x);
      EXPECT_LE(max_abs_diff(a.scores, b.scores), 1e-10);
    }
  }
}

TEST(Explain, ShapleyEfficiency) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Ensemble e = random_model(8, 7, 60, 200 + seed, 4);
    std::mt19937_64 rng(seed);
    const Explainer explainer(e);
    for (const auto& x : random_instances(8, 3, rng)) {
      const InteractionResult r = explainer.explain_sv(x);
      EXPECT_LE(std::abs(r.baseline + r.scores.sum() - predict(e, x)), 1e-9);
    }
  }
}

TEST(Explain, DummyFeaturesScoreExactlyZero) {
  // Features 5 and 6 appear in no tree.
  Ensemble e = random_model(5, 6, 30, 5, 2);
  e.n_features = 7;
  std::mt19937_64 rng(5);
  const Explainer explainer(e);
  for (const auto& x : random_instances(7, 3, rng)) {
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig c;
      c.order = s;
      const InteractionResult r = explainer.explain(x, c);
      r.scores.for_each_dense([&](std::span<const int> subset, double v) {
        if (subset.back() >= 5) {
          EXPECT_EQ(v, 0.0);
        }
      });
    }
  }
}

TEST(Explain, SymmetryUnderRelabelingIsBitEqual) {
  std::mt19937_64 rng(61);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const int n = 6;
    const Ensemble e = random_model(n, 6, 30, 300 + seed, 2);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Ensemble relabeled = e;
    for (TreeModel& t : relabeled.trees) {
      for (int& f : t.feature) {
        if (f != kNoNode) f = perm[f];
      }
    }
    const auto x = random_instances(n, 1, rng)[0];
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[perm[i]] = x[i];
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig c;
      c.order = s;
      const InteractionResult a = explain_interactions(e, x, c);
      const InteractionResult b = explain_interactions(relabeled, y, c);
      a.scores.for_each_dense([&](std::span<const int> subset, double v) {
        std::vector<int> image(subset.size());
        for (std::size_t k = 0; k < subset.size(); ++k) image[k] = perm[subset[k]];
        std::sort(image.begin(), image.end());
        EXPECT_EQ(b.scores.get(image), v);
      });
    }
  }
}

TEST(Explain, ExchangeableFeaturesGetEqualScores) {
  // Feature 0 at the root, feature 1 below on both sides with identical
  // weights; the leaf values are symmetric in the two features.
  TreeModel t;
  t.left = {1, 3, 5, -1, -1, -1, -1};
  t.right = {2, 4, 6, -1, -1, -1, -1};
  t.feature = {0, 1, 1, -1, -1, -1, -1};
  t.threshold = {0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
  t.count = {100.0, 40.0, 60.0, 16.0, 24.0, 24.0, 36.0};
  t.value = {0.0, 0.0, 0.0, 0.0, 1.0, 1.0, -2.0};
  Ensemble e;
  e.n_features = 2;
  e.trees.push_back(t);
  for (double v : {0.2, 0.8}) {
    const std::vector<double> x{v, v};
    const InteractionResult r = explain_sv(e, x);
    const int a[1] = {0};
    const int b[1] = {1};
    EXPECT_NEAR(r.scores.get(a), r.scores.get(b), 1e-15);
  }
}

TEST(Explain, LinearOverEnsembles) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Ensemble e = random_model(6, 6, 30, 400 + seed, 2);
    Ensemble first = e;
    Ensemble second = e;
    first.trees.resize(1);
    second.trees.erase(second.trees.begin());
    std::mt19937_64 rng(seed);
    const auto x = random_instances(6, 1, rng)[0];
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig c;
      c.order = s;
      const InteractionResult both = explain_interactions(e, x, c);
      const InteractionResult a = explain_interactions(first, x, c);
      const InteractionResult b = explain_interactions(second, x, c);
      both.scores.for_each_dense([&](std::span<const int> subset, double v) {
        EXPECT_NEAR(v, a.scores.get(subset) + b.scores.get(subset), 1e-10);
      });
    }
  }
}

TEST(Explain, UpdateSkipMatchesAllSubsetTraversal) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const int n = 5 + static_cast<int>(seed % 3);
    const Ensemble e = random_model(n, 6, 30, 500 + seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(n, 1, rng)[0];
    const Explainer explainer(e);
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig restricted;
      restricted.order = s;
      restricted.zero_floor = 0.0;
      ExplainConfig full = restricted;
      full.mode = TraversalMode::kAllSubsets;
      const InteractionResult a = explainer.explain(x, restricted);
      const InteractionResult b = explainer.explain(x, full);
      a.scores.for_each_dense([&](std::span<const int> subset, double v) {
        EXPECT_NEAR(b.scores.get(subset), v, 1e-9 * std::max(1.0, std::abs(v)));
      });
    }
  }
}

TEST(ExplainCii, SiiThroughCustomWeights) {
  poly::CiiSpec custom;
  custom.kind = poly::IndexKind::kCustom;
  custom.custom = [](int n, int s, int t) {
    return 1.0 / ((n - s + 1) * binomial_real(n - s, t));
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Ensemble e = random_model(6, 5, 20, 600 + seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(6, 1, rng)[0];
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig sii;
      sii.order = s;
      ExplainConfig cii = sii;
      cii.index = custom;
      EXPECT_LE(max_abs_diff(explain_interactions(e, x, sii).scores,
                             explain_interactions(e, x, cii).scores),
                1e-9);
    }
  }
}

TEST(ExplainCii, BanzhafMatchesOracle) {
  poly::CiiSpec banzhaf;
  banzhaf.kind = poly::IndexKind::kBanzhaf;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Ensemble e = random_model(5, 5, 16, 700 + seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(5, 1, rng)[0];
    for (int s = 1; s <= 3; ++s) {
      ExplainConfig c;
      c.order = s;
      c.index = banzhaf;
      const InteractionResult r = explain_interactions(e, x, c);
      const InteractionResult o = oracle::brute_all(e, x, s, banzhaf);
      EXPECT_EQ(r.index, "banzhaf");
      EXPECT_LE(worst_ratio(r.scores, o.scores, 1e-8, 1e-12), 1.0);
    }
  }
}

TEST(Explain, SparseStorageAboveDenseLimit) {
  const int n = ScoreTable::kDenseFeatureLimit + 2;
  const Ensemble e = random_model(n, 8, 60, 9, 3);
  std::mt19937_64 rng(9);
  const auto x = random_instances(n, 1, rng)[0];
  const Explainer explainer(e);
  const InteractionResult sv = explainer.explain_sv(x);
  EXPECT_FALSE(sv.scores.dense());
  EXPECT_LE(std::abs(sv.baseline + sv.scores.sum() - predict(e, x)), 1e-9);
  ExplainConfig restricted;
  restricted.order = 2;
  restricted.zero_floor = 0.0;
  ExplainConfig full = restricted;
  full.mode = TraversalMode::kAllSubsets;
  const InteractionResult a = explainer.explain(x, restricted);
  const InteractionResult b = explainer.explain(x, full);
  for (const auto& [subset, v] : b.scores.nonzero_entries()) {
    EXPECT_NEAR(a.scores.get(subset), v, 1e-9 * std::max(1.0, std::abs(v)));
  }
  for (const auto& [subset, v] : a.scores.nonzero_entries()) {
    EXPECT_NEAR(b.scores.get(subset), v, 1e-9 * std::max(1.0, std::abs(v)));
  }
}

// A chain splitting on a new feature at every level.
Ensemble chain(int depth) {
  TreeModel t;
  double count = 1e6;
  int next = 0;
  for (int level = 0; level < depth; ++level) {
    const int node = next++;
    const int leaf = next++;
    t.left.resize(next, kNoNode);
    t.right.resize(next, kNoNode);
    t.feature.resize(next, kNoNode);
    t.threshold.resize(next, 0.0);
    t.count.resize(next, 0.0);
    t.value.resize(next, 0.0);
    t.count[node] = count;
    t.feature[node] = level;
    t.threshold[node] = 0.5;
    t.left[node] = leaf;
    t.right[node] = next;
    t.count[leaf] = count * 0.3;
    t.value[leaf] = std::sin(level + 1.0);
    count *= 0.7;
  }
  t.left.push_back(kNoNode);
  t.right.push_back(kNoNode);
  t.feature.push_back(kNoNode);
  t.threshold.push_back(0.0);
  t.count.push_back(count);
  t.value.push_back(2.0);
  // Children carry larger ids than their parents.
  for (int v = t.size() - 1; v >= 0; --v) {
    if (!t.is_leaf(v)) t.count[v] = t.count[t.left[v]] + t.count[t.right[v]];
  }
  Ensemble e;
  e.n_features = depth;
  e.trees.push_back(t);
  validate(e);
  return e;
}

TEST(Explain, DeepPathMatchesOracle) {
  const Ensemble e = chain(16);
  std::vector<double> x(16, 0.9);
  x[13] = 0.1;
  poly::CiiSpec banzhaf;
  banzhaf.kind = poly::IndexKind::kBanzhaf;
  for (int s = 1; s <= 2; ++s) {
    ExplainConfig c;
    c.order = s;
    const InteractionResult r = explain_interactions(e, x, c);
    const InteractionResult o = oracle::brute_all(e, x, s);
    EXPECT_LE(worst_ratio(r.scores, o.scores, 1e-8, 1e-12), 1.0) << s;
    c.index = banzhaf;
    const InteractionResult rb = explain_interactions(e, x, c);
    const InteractionResult ob = oracle::brute_all(e, x, s, banzhaf);
    EXPECT_LE(worst_ratio(rb.scores, ob.scores, 1e-8, 1e-12), 1.0) << s;
  }
}

TEST(Explain, DeepPathEfficiency) {
  for (int depth : {24, 40, 100, 300}) {
    const Ensemble e = chain(depth);
    std::vector<double> x(depth, 0.9);
    x[depth - 3] = 0.1;
    const InteractionResult r = explain_sv(e, x);
    EXPECT_LE(std::abs(r.baseline + r.scores.sum() - predict(e, x)), 1e-9) << depth;
    ExplainConfig c;
    c.zero_floor = 0.0;
    const InteractionResult sii = explain_interactions(e, x, c);
    EXPECT_LE(max_abs_diff(sii.scores, r.scores), 1e-12) << depth;
  }
}

// The Chebyshev grid in y is accurate for shallow paths only; pin where it
// still meets the efficiency tolerance and that it is unusable further down.
TEST(Explain, ChebyshevGridDegradesWithPathDegree) {
  auto residual = [](int depth) {
    const Ensemble e = chain(depth);
    std::vector<double> x(depth, 0.9);
    x[depth - 3] = 0.1;
    const InteractionResult r = explain_sv(e, x, GridKind::kChebyshev);
    return std::abs(r.baseline + r.scores.sum() - predict(e, x));
  };
  EXPECT_LE(residual(12), 1e-10);
  EXPECT_GT(residual(28), 1e-6);
}

TEST(Explain, GridKindsAgreeOnShallowTrees) {
  poly::CiiSpec banzhaf;
  banzhaf.kind = poly::IndexKind::kBanzhaf;
  poly::CiiSpec custom;
  custom.kind = poly::IndexKind::kCustom;
  custom.custom = [](int n, int s, int t) {
    return 1.0 / (1.0 + t + (n - s - t) * 0.5);
  };
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const int n = 6 + static_cast<int>(seed);
    const Ensemble e = random_model(n, 7, 40, 900 + seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(n, 1, rng)[0];
    const Explainer explainer(e);
    for (const poly::CiiSpec& index : {poly::CiiSpec{}, banzhaf, custom}) {
      for (TraversalMode mode :
           {TraversalMode::kRestricted, TraversalMode::kAllSubsets}) {
        for (int s = 1; s <= 3; ++s) {
          ExplainConfig unit;
          unit.order = s;
          unit.index = index;
          unit.mode = mode;
          ExplainConfig cheb = unit;
          cheb.grid = GridKind::kChebyshev;
          const InteractionResult a = explainer.explain(x, unit);
          const InteractionResult b = explainer.explain(x, cheb);
          const InteractionResult o = oracle::brute_all(e, x, s, index);
          EXPECT_LE(worst_ratio(a.scores, o.scores, 1e-8, 1e-12), 1.0) << s;
          EXPECT_LE(worst_ratio(b.scores, o.scores, 1e-8, 1e-12), 1.0) << s;
        }
      }
    }
    const InteractionResult sv_unit = explainer.explain_sv(x);
    const InteractionResult sv_cheb = explainer.explain_sv(x, GridKind::kChebyshev);
    EXPECT_LE(max_abs_diff(sv_unit.scores, sv_cheb.scores), 1e-10);
  }
}

TEST(Explain, ConcurrentCallsAgree) {
  const Ensemble e = random_model(8, 7, 60, 31, 5);
  std::mt19937_64 rng(31);
  const auto xs = random_instances(8, 8, rng);
  const Explainer explainer(e);
  ExplainConfig c;
  c.order = 2;
  std::vector<InteractionResult> serial;
  for (const auto& x : xs) serial.push_back(explainer.explain(x, c));
  std::vector<InteractionResult> parallel(xs.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    pool.emplace_back([&, k] { parallel[k] = explainer.explain(xs[k], c); });
  }
  for (auto& th : pool) th.join();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    EXPECT_EQ(max_abs_diff(serial[k].scores, parallel[k].scores), 0.0);
  }
}

TEST(Explain, InputErrors) {
  const Ensemble e = load_fixture("three_feature.json");
  const std::vector<double> x{0.1, 0.2, 0.3};
  ExplainConfig c;
  c.order = 4;
  EXPECT_THROW(explain_interactions(e, x, c), InputError);
  c.order = 0;
  EXPECT_THROW(explain_interactions(e, x, c), InputError);
  EXPECT_THROW(explain_sv(e, std::vector<double>{0.1, NAN, 0.3}), InputError);
  EXPECT_THROW(explain_nsii(e, x, 4), InputError);
}

}  // namespace
}  // namespace treeint
