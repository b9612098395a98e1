#include "treeint/synth.h"

#include <algorithm>

#include "treeint/error.h"

namespace treeint {

namespace {

int add_leaf(TreeModel& tree, double count, double value) {
  tree.left.push_back(kNoNode);
  tree.right.push_back(kNoNode);
  tree.feature.push_back(kNoNode);
  tree.threshold.push_back(0.0);
  tree.count.push_back(count);
  tree.value.push_back(value);
  return tree.size() - 1;
}

}  // namespace

TreeModel random_tree(const TreeSpec& spec, std::mt19937_64& rng) {
  if (spec.n_features < 1 || spec.max_depth < 0 || spec.leaves < 1) {
    throw InputError("invalid tree generator parameters");
  }
  if (spec.max_depth < 62 && spec.leaves > (1LL << spec.max_depth)) {
    throw InputError("cannot fit " + std::to_string(spec.leaves) +
                     " leaves into depth " + std::to_string(spec.max_depth));
  }
  std::uniform_int_distribution<int> pick_feature(0, spec.n_features - 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::gamma_distribution<double> gamma(spec.split_concentration, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  TreeModel tree;
  std::vector<int> depth;
  add_leaf(tree, spec.root_count, normal(rng));
  depth.push_back(0);
  // Leaves that may still be split.
  std::vector<int> open{0};
  int n_leaves = 1;
  while (n_leaves < spec.leaves) {
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    const std::size_t slot = pick(rng);
    const int v = open[slot];
    open[slot] = open.back();
    open.pop_back();

    const double a = gamma(rng);
    const double b = gamma(rng);
    const double fraction =
        std::clamp(a / (a + b), spec.min_fraction, 1.0 - spec.min_fraction);
    const double left_count = tree.count[v] * fraction;
    const double right_count = tree.count[v] - left_count;
    tree.feature[v] = pick_feature(rng);
    tree.threshold[v] = uniform(rng);
    const int l = add_leaf(tree, left_count, normal(rng));
    const int r = add_leaf(tree, right_count, normal(rng));
    tree.left[v] = l;
    tree.right[v] = r;
    depth.push_back(depth[v] + 1);
    depth.push_back(depth[v] + 1);
    ++n_leaves;
    for (int child : {l, r}) {
      if (depth[child] < spec.max_depth) open.push_back(child);
    }
  }
  return tree;
}

Ensemble random_ensemble(const TreeSpec& spec, int n_trees, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Ensemble ensemble;
  ensemble.n_features = spec.n_features;
  ensemble.output_kind = OutputKind::kRegressionValue;
  for (int t = 0; t < n_trees; ++t) {
    ensemble.trees.push_back(random_tree(spec, rng));
  }
  validate(ensemble);
  return ensemble;
}

std::vector<std::vector<double>> random_instances(int n_features, int count,
                                                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::vector<double>> out(count, std::vector<double>(n_features));
  for (auto& x : out) {
    for (double& v : x) v = uniform(rng);
  }
  return out;
}

}  // namespace treeint
