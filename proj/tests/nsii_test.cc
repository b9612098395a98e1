#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.h"
#include "treeint/engine.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"

namespace treeint {
namespace {

using testing::load_fixture;

double total(const std::vector<InteractionResult>& results) {
  double sum = results.at(0).baseline;
  for (const InteractionResult& r : results) sum += r.scores.sum();
  return sum;
}

TEST(Bernoulli, FirstValues) {
  const auto b = bernoulli_numbers(8);
  EXPECT_EQ(b[0], 1.0);
  EXPECT_DOUBLE_EQ(b[1], -0.5);
  EXPECT_DOUBLE_EQ(b[2], 1.0 / 6.0);
  EXPECT_EQ(b[3], 0.0);
  EXPECT_DOUBLE_EQ(b[4], -1.0 / 30.0);
  EXPECT_EQ(b[5], 0.0);
  EXPECT_DOUBLE_EQ(b[6], 1.0 / 42.0);
  EXPECT_EQ(b[7], 0.0);
  EXPECT_DOUBLE_EQ(b[8], -1.0 / 30.0);
}

TEST(Nsii, OrderOneIsShapley) {
  TreeSpec spec;
  spec.n_features = 6;
  spec.leaves = 30;
  spec.max_depth = 6;
  const Ensemble e = random_ensemble(spec, 2, 21);
  std::mt19937_64 rng(21);
  const Explainer explainer(e);
  for (const auto& x : random_instances(6, 3, rng)) {
    const auto nsii = explainer.explain_nsii(x, 1);
    ASSERT_EQ(nsii.size(), 1u);
    const InteractionResult sii = explainer.explain(x, ExplainConfig{});
    EXPECT_EQ(testing::max_abs_diff(nsii[0].scores, sii.scores), 0.0);
    EXPECT_EQ(nsii[0].index, "n-sii");
  }
}

TEST(Nsii, FullOrderIsEfficientOnFixture) {
  const Ensemble e = load_fixture("three_feature.json");
  for (const std::vector<double>& x :
       {std::vector<double>{0.2, 0.1, 0.9}, std::vector<double>{0.9, 0.7, 0.5}}) {
    const auto nsii = explain_nsii(e, x, 3);
    EXPECT_LE(std::abs(total(nsii) - predict(e, x)), 1e-9);
    EXPECT_LE(std::abs(efficiency_residual(nsii)), 1e-9);
  }
}

TEST(Nsii, EfficiencyForEveryMaxOrder) {
  TreeSpec spec;
  spec.n_features = 6;
  spec.leaves = 40;
  spec.max_depth = 6;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Ensemble e = random_ensemble(spec, 3, 30 + seed);
    std::mt19937_64 rng(seed);
    const Explainer explainer(e);
    const auto x = random_instances(6, 1, rng)[0];
    for (int s0 = 1; s0 <= 6; ++s0) {
      const auto nsii = explainer.explain_nsii(x, s0);
      EXPECT_LE(std::abs(total(nsii) - predict(e, x)), 1e-8) << s0;
    }
  }
}

TEST(Nsii, InteractionAbsorbsXorAttribution) {
  const Ensemble e = load_fixture("xor.json");
  const std::vector<double> x{0.2, 0.8};
  const InteractionResult sv = explain_sv(e, x);
  const auto nsii = explain_nsii(e, x, 2);
  // Same aggregation applied to brute-force SII.
  std::vector<InteractionResult> brute;
  for (int k = 1; k <= 2; ++k) brute.push_back(oracle::brute_all(e, x, k));
  const auto expect = aggregate_nsii(brute);
  const int pair[2] = {0, 1};
  for (int i = 0; i < 2; ++i) {
    const int s[1] = {i};
    EXPECT_GT(sv.scores.get(s), 0.0);
    EXPECT_LT(std::abs(nsii[0].scores.get(s)), std::abs(sv.scores.get(s)));
    EXPECT_NEAR(nsii[0].scores.get(s), expect[0].scores.get(s), 1e-12);
  }
  EXPECT_GT(nsii[1].scores.get(pair), 0.0);
  EXPECT_NEAR(nsii[1].scores.get(pair), expect[1].scores.get(pair), 1e-12);
  EXPECT_NEAR(total(nsii), sv.baseline + sv.scores.sum(), 1e-12);
}

TEST(NsiiDistribution, SplitsEqually) {
  InteractionResult r1;
  r1.order = 1;
  r1.scores = ScoreTable(4, 1);
  InteractionResult r2;
  r2.order = 2;
  r2.scores = ScoreTable(4, 2);
  const int pair[2] = {1, 3};
  r2.scores.add(pair, 0.6);
  const auto stacks = nsii_feature_distribution({r1, r2});
  ASSERT_EQ(stacks.size(), 4u);
  EXPECT_DOUBLE_EQ(stacks[1].orders[1].positive, 0.3);
  EXPECT_DOUBLE_EQ(stacks[3].orders[1].positive, 0.3);
  EXPECT_EQ(stacks[0].total(), 0.0);
  for (const FeatureStack& f : stacks) {
    for (const OrderMass& m : f.orders) EXPECT_EQ(m.negative, 0.0);
  }
}

TEST(NsiiDistribution, SignedSumsReproduceShapley) {
  TreeSpec spec;
  spec.n_features = 5;
  spec.leaves = 30;
  spec.max_depth = 6;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Ensemble e = random_ensemble(spec, 2, 50 + seed);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(5, 1, rng)[0];
    const Explainer explainer(e);
    const auto stacks = nsii_feature_distribution(explainer.explain_nsii(x, 5));
    const InteractionResult sv = explainer.explain_sv(x);
    for (int i = 0; i < 5; ++i) {
      const int s[1] = {i};
      EXPECT_NEAR(stacks[i].total(), sv.scores.get(s), 1e-8);
    }
  }
}

}  // namespace
}  // namespace treeint
