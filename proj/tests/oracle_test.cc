#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "test_util.h"
#include "treeint/error.h"
#include "treeint/oracle.h"
#include "treeint/synth.h"

namespace treeint::oracle {
namespace {

using testing::load_fixture;

Ensemble random_model(int n, int leaves, std::uint64_t seed, int trees = 1) {
  TreeSpec spec;
  spec.n_features = n;
  spec.max_depth = 6;
  spec.leaves = leaves;
  return random_ensemble(spec, trees, seed);
}

// Shapley values as the mean marginal contribution over all orderings.
std::vector<double> permutation_shapley(const Ensemble& e, std::span<const double> x) {
  const int n = e.n_features;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> phi(n, 0.0);
  double count = 0.0;
  do {
    std::uint64_t mask = 0;
    double prev = restricted_predict(e, x, mask);
    for (int i : perm) {
      mask |= std::uint64_t{1} << i;
      const double next = restricted_predict(e, x, mask);
      phi[i] += next - prev;
      prev = next;
    }
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (double& v : phi) v /= count;
  return phi;
}

TEST(RestrictedPredict, EmptyAndFullCoalitions) {
  const Ensemble e = random_model(5, 24, 3, 2);
  std::mt19937_64 rng(2);
  for (const auto& x : random_instances(5, 4, rng)) {
    double baseline = e.baseline_offset;
    for (const TreeModel& t : e.trees) {
      const EdgeTables et = precompute_edge_tables(t);
      for (double r : et.r_empty) baseline += r;
    }
    EXPECT_NEAR(restricted_predict(e, x, std::uint64_t{0}), baseline, 1e-12);
    EXPECT_NEAR(restricted_predict(e, x, std::uint64_t{0b11111}), predict(e, x), 1e-10);
  }
}

TEST(RestrictedPredict, DepthOneKnownFeature) {
  const Ensemble e = load_fixture("depth1.json");
  const std::vector<double> x{0.2};
  const int t[1] = {0};
  EXPECT_DOUBLE_EQ(restricted_predict(e, x, t), 1.0);
  EXPECT_DOUBLE_EQ(restricted_predict(e, x, std::uint64_t{0}), 0.5);
}

TEST(RestrictedPredict, LinearOverTrees) {
  const Ensemble e = random_model(5, 20, 8, 3);
  std::mt19937_64 rng(4);
  const auto x = random_instances(5, 1, rng)[0];
  for (std::uint64_t mask = 0; mask < 32; ++mask) {
    double sum = e.baseline_offset;
    for (const TreeModel& t : e.trees) {
      Ensemble single;
      single.n_features = e.n_features;
      single.trees.push_back(t);
      sum += restricted_predict(single, x, mask);
    }
    EXPECT_NEAR(restricted_predict(e, x, mask), sum, 1e-12);
  }
}

TEST(SDerivative, SingletonIsMarginalContribution) {
  const Ensemble e = random_model(4, 12, 5);
  const std::vector<double> x{0.3, 0.6, 0.1, 0.8};
  CoalitionGame game(e, x);
  const std::uint64_t t = 0b0101;
  const std::uint64_t s = 0b0010;
  EXPECT_DOUBLE_EQ(s_derivative(game, s, t), game.value(t | s) - game.value(t));
  EXPECT_THROW(s_derivative(game, 0b0011, 0b0001), InputError);
}

TEST(SDerivative, AdditiveModelHasNoInteraction) {
  Ensemble e;
  e.n_features = 3;
  e.trees.push_back(testing::stump(0, 30.0, 70.0, 2.0, -1.0));
  e.trees.push_back(testing::stump(1, 50.0, 50.0, 0.5, 4.0));
  e.trees.push_back(testing::stump(2, 80.0, 20.0, -3.0, 1.0));
  const std::vector<double> x{0.2, 0.7, 0.4};
  CoalitionGame game(e, x);
  for (std::uint64_t t : {0b000u, 0b100u}) {
    EXPECT_NEAR(s_derivative(game, 0b011, t), 0.0, 1e-15);
  }
}

TEST(SDerivative, XorInteraction) {
  const Ensemble e = load_fixture("xor.json");
  const std::vector<double> x{0.2, 0.8};
  CoalitionGame game(e, x);
  const double f01 = restricted_predict(e, x, std::uint64_t{0b11});
  const double f0 = restricted_predict(e, x, std::uint64_t{0b01});
  const double f1 = restricted_predict(e, x, std::uint64_t{0b10});
  const double f = restricted_predict(e, x, std::uint64_t{0});
  const double d = s_derivative(game, 0b11, 0);
  EXPECT_DOUBLE_EQ(d, f01 - f0 - f1 + f);
  EXPECT_NE(d, 0.0);
}

TEST(BruteInteraction, SiiOrderOneIsShapley) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Ensemble e = random_model(5, 20, seed, 2);
    std::mt19937_64 rng(seed);
    const auto x = random_instances(5, 1, rng)[0];
    const auto phi = permutation_shapley(e, x);
    const InteractionResult r = brute_all(e, x, 1);
    for (int i = 0; i < 5; ++i) {
      const int s[1] = {i};
      EXPECT_NEAR(r.scores.get(s), phi[i], 1e-12);
    }
  }
}

TEST(BruteInteraction, DepthOneExample) {
  const Ensemble e = load_fixture("depth1.json");
  const std::vector<double> x{0.2};
  const int s[1] = {0};
  EXPECT_DOUBLE_EQ(brute_interaction(e, x, s, index_weights({}, 1, 1)), 0.5);
}

TEST(BruteInteraction, BanzhafWeights) {
  poly::CiiSpec banzhaf;
  banzhaf.kind = poly::IndexKind::kBanzhaf;
  const WeightFn w = index_weights(banzhaf, 6, 2);
  for (int t = 0; t <= 4; ++t) EXPECT_DOUBLE_EQ(w(t), 1.0 / 16.0);
  // Banzhaf value of feature i: mean marginal contribution over all
  // coalitions of the others.
  const Ensemble e = random_model(4, 12, 6);
  const std::vector<double> x{0.1, 0.5, 0.9, 0.3};
  CoalitionGame game(e, x);
  for (int i = 0; i < 4; ++i) {
    double mean = 0.0;
    for (std::uint64_t t = 0; t < 16; ++t) {
      if (t >> i & 1) continue;
      mean += game.value(t | (std::uint64_t{1} << i)) - game.value(t);
    }
    mean /= 8.0;
    const int s[1] = {i};
    EXPECT_NEAR(brute_interaction(game, s, index_weights(banzhaf, 4, 1)), mean, 1e-14);
  }
}

TEST(BruteInteraction, EnumerationCounts) {
  const Ensemble e = random_model(7, 20, 12);
  const std::vector<double> x(7, 0.4);
  CoalitionGame game(e, x);
  for (int s = 1; s <= 4; ++s) {
    std::vector<int> subset(s);
    std::iota(subset.begin(), subset.end(), 0);
    EnumerationStats stats;
    BruteOptions options;
    options.stats = &stats;
    brute_interaction(game, subset, index_weights({}, 7, s), options);
    EXPECT_EQ(stats.coalitions, std::uint64_t{1} << (7 - s));
    EXPECT_EQ(stats.sub_coalitions, stats.coalitions << s);
  }
  EXPECT_EQ(game.evaluations(), 128u);
}

TEST(BruteInteraction, ShuffledOrderAgrees) {
  const Ensemble e = random_model(8, 40, 13, 2);
  std::mt19937_64 rng(13);
  const auto x = random_instances(8, 1, rng)[0];
  for (int s = 1; s <= 3; ++s) {
    const InteractionResult plain = brute_all(e, x, s);
    for (std::uint64_t seed : {1u, 2u, 99u}) {
      BruteOptions options;
      options.shuffle_seed = seed;
      const InteractionResult shuffled = brute_all(e, x, s, {}, options);
      EXPECT_LE(testing::max_abs_diff(plain.scores, shuffled.scores), 1e-14);
    }
  }
}

TEST(BruteInteraction, SizeGuard) {
  TreeSpec spec;
  spec.n_features = 30;
  spec.leaves = 8;
  const Ensemble e = random_ensemble(spec, 1, 1);
  const std::vector<double> x(30, 0.5);
  const int s[1] = {0};
  EXPECT_THROW(brute_interaction(e, x, s, index_weights({}, 30, 1)), LimitError);
  EXPECT_THROW(brute_all(e, x, 1), LimitError);
}

}  // namespace
}  // namespace treeint::oracle
