#include "treeint/treemodel.h"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <limits>
#include "json.hpp"
#include <sstream>
#include <string>

#include "treeint/error.h"

namespace treeint {

namespace {

using Json = nlohmann::ordered_json;

constexpr double kCountTolerance = 1e-6;

std::string node_ref(std::size_t tree, int node) {
  return "tree " + std::to_string(tree) + " node " + std::to_string(node);
}

const Json& member(const Json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw InputError(std::string("missing field \"") + key + "\"");
  }
  return *it;
}

double as_double(const Json& j, const std::string& what) {
  if (!j.is_number()) throw InputError(what + " is not a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& what) {
  if (!j.is_number_integer()) throw InputError(what + " is not an integer");
  const auto v = j.get<std::int64_t>();
  if (v < -1 || v > std::numeric_limits<int>::max()) {
    throw InputError(what + " out of range");
  }
  return static_cast<int>(v);
}

template <typename T, typename Convert>
std::vector<T> read_array(const Json& tree, const char* key, Convert convert) {
  const Json& arr = member(tree, key);
  if (!arr.is_array()) {
    throw InputError(std::string("field \"") + key + "\" is not an array");
  }
  std::vector<T> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(convert(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

TreeModel parse_tree(const Json& j, std::size_t index) {
  if (!j.is_object()) {
    throw InputError("tree " + std::to_string(index) + " is not an object");
  }
  TreeModel tree;
  tree.left = read_array<int>(j, "left", as_int);
  tree.right = read_array<int>(j, "right", as_int);
  tree.feature = read_array<int>(j, "feature", as_int);
  tree.threshold = read_array<double>(j, "threshold", as_double);
  tree.count = read_array<double>(j, "count", as_double);
  tree.value = read_array<double>(j, "value", as_double);
  return tree;
}

void validate_tree(const TreeModel& tree, std::size_t t, int n_features) {
  const std::size_t n = tree.left.size();
  if (n == 0) throw InputError("tree " + std::to_string(t) + " has no nodes");
  if (tree.right.size() != n || tree.feature.size() != n ||
      tree.threshold.size() != n || tree.count.size() != n ||
      tree.value.size() != n) {
    throw InputError("tree " + std::to_string(t) +
                     " has node arrays of different lengths");
  }
  const int size = static_cast<int>(n);
  std::vector<int> parent(n, kNoNode);
  for (int v = 0; v < size; ++v) {
    const bool no_left = tree.left[v] == kNoNode;
    const bool no_right = tree.right[v] == kNoNode;
    const bool no_feature = tree.feature[v] == kNoNode;
    if (no_left != no_right || no_left != no_feature) {
      throw InputError(node_ref(t, v) +
                       ": a leaf needs left, right and feature all -1");
    }
    if (!(tree.count[v] > 0.0) || !std::isfinite(tree.count[v])) {
      throw InputError(node_ref(t, v) + ": sample count must be positive");
    }
    if (!std::isfinite(tree.value[v])) {
      throw InputError(node_ref(t, v) + ": non-finite value");
    }
    if (no_left) continue;
    if (tree.feature[v] < 0 || tree.feature[v] >= n_features) {
      throw InputError(node_ref(t, v) + ": split feature " +
                       std::to_string(tree.feature[v]) + " outside 0.." +
                       std::to_string(n_features - 1));
    }
    if (!std::isfinite(tree.threshold[v])) {
      throw InputError(node_ref(t, v) + ": non-finite threshold");
    }
    for (int child : {tree.left[v], tree.right[v]}) {
      if (child < 0 || child >= size) {
        throw InputError(node_ref(t, v) + ": child id " +
                         std::to_string(child) + " out of range");
      }
      if (child == 0) {
        throw InputError(node_ref(t, v) + ": cycle detected (root used as child)");
      }
      if (parent[child] != kNoNode) {
        throw InputError(node_ref(t, child) + " has more than one parent");
      }
      parent[child] = v;
    }
    if (tree.left[v] == tree.right[v]) {
      throw InputError(node_ref(t, v) + ": both children are the same node");
    }
  }
  // Every node must hang below the root; otherwise the remainder contains a
  // cycle or a detached component.
  std::vector<int> stack{0};
  std::vector<char> reached(n, 0);
  reached[0] = 1;
  int visited = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++visited;
    if (tree.left[v] == kNoNode) continue;
    for (int child : {tree.left[v], tree.right[v]}) {
      if (reached[child]) throw InputError(node_ref(t, child) + ": cycle detected");
      reached[child] = 1;
      stack.push_back(child);
    }
  }
  if (visited != size) {
    throw InputError("tree " + std::to_string(t) +
                     ": cycle detected or nodes unreachable from the root");
  }
  for (int v = 0; v < size; ++v) {
    if (tree.left[v] == kNoNode) continue;
    const double sum = tree.count[tree.left[v]] + tree.count[tree.right[v]];
    if (std::abs(sum - tree.count[v]) > kCountTolerance * tree.count[v]) {
      throw InputError(node_ref(t, v) + ": child sample counts sum to " +
                       std::to_string(sum) + ", parent has " +
                       std::to_string(tree.count[v]));
    }
    for (int child : {tree.left[v], tree.right[v]}) {
      const double w = tree.edge_weight(v, child);
      if (!(w > 0.0 && w < 1.0)) {
        throw InputError(node_ref(t, child) + ": edge weight " +
                         std::to_string(w) + " not in (0, 1)");
      }
    }
  }
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(),
                 nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

}  // namespace

std::string_view to_string(OutputKind kind) {
  return kind == OutputKind::kRawMargin ? "raw-margin" : "regression-value";
}

Ensemble load_ensemble_string(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
  if (!doc.is_object()) throw InputError("model document is not an object");
  const Json& version = member(doc, "format_version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    throw InputError("unsupported format_version (expected 1)");
  }
  const Json& routing = member(doc, "routing");
  if (!routing.is_string() || routing.get<std::string>() != "le-left") {
    throw InputError("unsupported routing convention (expected \"le-left\")");
  }
  Ensemble ensemble;
  const Json& n = member(doc, "n_features");
  if (!n.is_number_integer() || n.get<std::int64_t>() < 1 ||
      n.get<std::int64_t>() > std::numeric_limits<int>::max()) {
    throw InputError("n_features must be a positive integer");
  }
  ensemble.n_features = n.get<int>();
  ensemble.baseline_offset =
      as_double(member(doc, "baseline_offset"), "baseline_offset");
  const Json& kind = member(doc, "output_kind");
  if (kind == "raw-margin") {
    ensemble.output_kind = OutputKind::kRawMargin;
  } else if (kind == "regression-value") {
    ensemble.output_kind = OutputKind::kRegressionValue;
  } else {
    throw InputError("output_kind must be \"raw-margin\" or \"regression-value\"");
  }
  if (const auto it = doc.find("feature_names"); it != doc.end()) {
    if (!it->is_array()) throw InputError("feature_names is not an array");
    for (const auto& name : *it) {
      if (!name.is_string()) throw InputError("feature name is not a string");
      ensemble.feature_names.push_back(name.get<std::string>());
    }
  }
  const Json& trees = member(doc, "trees");
  if (!trees.is_array()) throw InputError("trees is not an array");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    ensemble.trees.push_back(parse_tree(trees[t], t));
  }
  validate(ensemble);
  return ensemble;
}

Ensemble load_ensemble(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_ensemble_string(buffer.str());
}

Ensemble load_ensemble_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file " + path);
  return load_ensemble(in);
}

void validate(const Ensemble& ensemble) {
  if (ensemble.n_features < 1) throw InputError("n_features must be positive");
  if (!std::isfinite(ensemble.baseline_offset)) {
    throw InputError("non-finite baseline_offset");
  }
  if (!ensemble.feature_names.empty() &&
      static_cast<int>(ensemble.feature_names.size()) != ensemble.n_features) {
    throw InputError("feature_names has " +
                     std::to_string(ensemble.feature_names.size()) +
                     " entries, expected " +
                     std::to_string(ensemble.n_features));
  }
  for (std::size_t t = 0; t < ensemble.trees.size(); ++t) {
    validate_tree(ensemble.trees[t], t, ensemble.n_features);
  }
}

std::string serialize(const Ensemble& ensemble) {
  Json doc;
  doc["format_version"] = 1;
  doc["routing"] = "le-left";
  doc["n_features"] = ensemble.n_features;
  doc["baseline_offset"] = ensemble.baseline_offset;
  doc["output_kind"] = std::string(to_string(ensemble.output_kind));
  if (!ensemble.feature_names.empty()) {
    doc["feature_names"] = ensemble.feature_names;
  }
  Json trees = Json::array();
  for (const TreeModel& tree : ensemble.trees) {
    Json t;
    t["left"] = tree.left;
    t["right"] = tree.right;
    t["feature"] = tree.feature;
    std::vector<double> thresholds = tree.threshold;
    for (int v = 0; v < tree.size(); ++v) {
      if (tree.is_leaf(v)) thresholds[v] = 0.0;
    }
    t["threshold"] = thresholds;
    t["count"] = tree.count;
    t["value"] = tree.value;
    trees.push_back(std::move(t));
  }
  doc["trees"] = std::move(trees);
  return doc.dump() + "\n";
}

std::string model_digest(const Ensemble& ensemble) {
  return sha256_hex(serialize(ensemble));
}

void check_instance(const Ensemble& ensemble, std::span<const double> x) {
  if (static_cast<int>(x.size()) != ensemble.n_features) {
    throw InputError("instance has " + std::to_string(x.size()) +
                     " values, model expects " +
                     std::to_string(ensemble.n_features));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InputError("instance value " + std::to_string(i) + " is not finite");
    }
  }
}

double predict_tree(const TreeModel& tree, std::span<const double> x) {
  int v = 0;
  while (!tree.is_leaf(v)) {
    v = x[tree.feature[v]] <= tree.threshold[v] ? tree.left[v] : tree.right[v];
  }
  return tree.value[v];
}

double predict(const Ensemble& ensemble, std::span<const double> x) {
  check_instance(ensemble, x);
  double total = ensemble.baseline_offset;
  for (const TreeModel& tree : ensemble.trees) total += predict_tree(tree, x);
  return total;
}

EdgeTables precompute_edge_tables(const TreeModel& tree) {
  const int n = tree.size();
  EdgeTables tables;
  tables.label.assign(n, kNoNode);
  tables.p_raw.assign(n, 1.0);
  tables.ancestor.assign(n, kNoNode);
  tables.path_degree.assign(n, 0);
  tables.subtree_degree.assign(n, 0);
  tables.r_empty.assign(n, 0.0);
  tables.leaf_features.assign(n, {});

  struct Frame {
    int node;
    double weight_product;
    bool expanded;
  };
  std::vector<Frame> stack{{0, 1.0, false}};
  // Depth-first with explicit enter/exit so per-feature state can be undone.
  std::vector<std::pair<int, int>> undo;  // (feature, previous last edge)
  // Innermost same-feature edge per feature along the current path.
  std::vector<int> feature_last;
  int max_feature = -1;
  for (int f : tree.feature) max_feature = std::max(max_feature, f);
  feature_last.assign(max_feature + 1, kNoNode);

  while (!stack.empty()) {
    Frame& frame = stack.back();
    const int v = frame.node;
    if (frame.expanded) {
      stack.pop_back();
      if (v != 0) {
        const auto [f, prev] = undo.back();
        undo.pop_back();
        feature_last[f] = prev;
      }
      if (!tree.is_leaf(v)) {
        tables.subtree_degree[v] =
            std::max(tables.subtree_degree[tree.left[v]],
                     tables.subtree_degree[tree.right[v]]);
      }
      continue;
    }
    frame.expanded = true;
    const double weight_product = frame.weight_product;
    if (v != 0) {
      // The parent's frame is still on the stack below this one.
      const int f = tables.label[v];
      undo.emplace_back(f, feature_last[f]);
      feature_last[f] = v;
    }
    if (tree.is_leaf(v)) {
      tables.r_empty[v] = tree.value[v] * weight_product;
      tables.subtree_degree[v] = tables.path_degree[v];
      auto& features = tables.leaf_features[v];
      for (int f = 0; f <= max_feature; ++f) {
        if (feature_last[f] != kNoNode) features.push_back(f);
      }
      tables.max_degree = std::max(tables.max_degree, tables.path_degree[v]);
      continue;
    }
    const int f = tree.feature[v];
    for (int child : {tree.right[v], tree.left[v]}) {
      const double w = tree.edge_weight(v, child);
      tables.label[child] = f;
      tables.ancestor[child] = feature_last[f];
      tables.p_raw[child] =
          (feature_last[f] == kNoNode ? 1.0 : tables.p_raw[feature_last[f]]) / w;
      tables.path_degree[child] =
          tables.path_degree[v] + (feature_last[f] == kNoNode ? 1 : 0);
      stack.push_back({child, weight_product * w, false});
    }
  }
  return tables;
}

}  // namespace treeint
