#ifndef TREEINT_TREEMODEL_H_
#define TREEINT_TREEMODEL_H_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treeint {

inline constexpr int kNoNode = -1;

enum class OutputKind { kRawMargin, kRegressionValue };

std::string_view to_string(OutputKind kind);

// Binary decision tree in node-array form. Leaves have left == right ==
// feature == -1; internal nodes carry a threshold and route x[f] <= t left.
struct TreeModel {
  std::vector<int> left;
  std::vector<int> right;
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<double> count;
  std::vector<double> value;

  int size() const { return static_cast<int>(left.size()); }
  bool is_leaf(int node) const { return left[node] == kNoNode; }
  // Sample fraction of the edge into `child` from its parent.
  double edge_weight(int parent, int child) const {
    return count[child] / count[parent];
  }
};

struct Ensemble {
  std::vector<TreeModel> trees;
  int n_features = 0;
  double baseline_offset = 0.0;
  OutputKind output_kind = OutputKind::kRegressionValue;
  std::vector<std::string> feature_names;
};

// Parses and validates an interchange document. Throws InputError.
Ensemble load_ensemble(std::istream& in);
Ensemble load_ensemble_string(std::string_view text);
Ensemble load_ensemble_file(const std::string& path);

// Checks every structural invariant. Throws InputError naming the defect.
void validate(const Ensemble& ensemble);

// Canonical interchange serialization (stable key order, shortest
// round-trip floats, leaf thresholds written as 0).
std::string serialize(const Ensemble& ensemble);

// Hex SHA-256 of the canonical serialization.
std::string model_digest(const Ensemble& ensemble);

// Throws InputError on a wrong length or a non-finite entry.
void check_instance(const Ensemble& ensemble, std::span<const double> x);

double predict_tree(const TreeModel& tree, std::span<const double> x);
double predict(const Ensemble& ensemble, std::span<const double> x);

// Per-edge quantities of one tree. Edges are identified by their head node.
struct EdgeTables {
  // Feature split at the tail of the edge into node v; -1 for the root.
  std::vector<int> label;
  // Product of inverse weights over the same-feature edges from the root
  // down to and including this edge.
  std::vector<double> p_raw;
  // Closest ancestor edge splitting on the same feature, or -1.
  std::vector<int> ancestor;
  // Distinct features on the path from the root to the node.
  std::vector<int> path_degree;
  // Largest path_degree of any leaf in the subtree under the node; the
  // degree of the aggregated summary polynomial there.
  std::vector<int> subtree_degree;
  // Leaf value times the product of edge weights on its path (0 for
  // internal nodes).
  std::vector<double> r_empty;
  // Sorted distinct features on the path to each leaf (empty for internal
  // nodes).
  std::vector<std::vector<int>> leaf_features;
  int max_degree = 0;
};

EdgeTables precompute_edge_tables(const TreeModel& tree);

// Whether x follows the edge into `child` at its parent's split.
inline bool routes_to(const TreeModel& tree, int parent, int child,
                      std::span<const double> x) {
  const bool goes_left = x[tree.feature[parent]] <= tree.threshold[parent];
  return goes_left == (tree.left[parent] == child);
}

}  // namespace treeint

#endif  // TREEINT_TREEMODEL_H_
