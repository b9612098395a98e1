#ifndef TREEINT_SYNTH_H_
#define TREEINT_SYNTH_H_

#include <cstdint>
#include <random>
#include <vector>

#include "treeint/treemodel.h"

namespace treeint {

struct TreeSpec {
  int n_features = 4;
  int max_depth = 4;
  // Grown by splitting random leaves above max_depth until reached; capped
  // at 2^max_depth.
  int leaves = 16;
  // Symmetric Dirichlet (Beta) concentration for the left sample fraction.
  double split_concentration = 2.0;
  // Sample fractions are clamped to [min_fraction, 1 - min_fraction].
  double min_fraction = 0.05;
  double root_count = 1000.0;
};

TreeModel random_tree(const TreeSpec& spec, std::mt19937_64& rng);

Ensemble random_ensemble(const TreeSpec& spec, int n_trees, std::uint64_t seed);

// Uniform [0, 1) instances matching the generator's threshold range.
std::vector<std::vector<double>> random_instances(int n_features, int count,
                                                  std::mt19937_64& rng);

}  // namespace treeint

#endif  // TREEINT_SYNTH_H_
