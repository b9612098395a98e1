#include "treeint/engine.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "treeint/error.h"

namespace treeint {

namespace {

using Vec = std::vector<double>;

void check_order(int order, int n) {
  if (order < 1 || order > n) {
    throw InputError("interaction order " + std::to_string(order) +
                     " outside 1.." + std::to_string(n));
  }
}

// out[k] = 1 / (p * scale[k] + shift[k]).
void fill_inverse_factor(double p, std::span<const double> scale,
                         std::span<const double> shift, Vec& out) {
  out.resize(shift.size());
  for (std::size_t k = 0; k < shift.size(); ++k) {
    const double b = p * scale[k] + shift[k];
    if (std::abs(b) < 1e-300) {
      throw SingularPointError("inter-path product " + std::to_string(p) +
                               " coincides with a grid node");
    }
    out[k] = 1.0 / b;
  }
}

// Everything one tree traversal needs that does not change along the path.
// Exactly one of `tables` (Chebyshev nodes in y) and `unit` (homogenized
// nodes in t) is set. A factor (p + y) is evaluated as p * scale + shift,
// which is p + y on the first grid and p (1-t) + t on the second.
struct TreeContext {
  const TreeModel& tree;
  const EdgeTables& edges;
  std::span<const double> x;
  const poly::WeightTables* tables = nullptr;
  const poly::UnitGrid* unit = nullptr;
  int storage = 0;
  int n_features = 0;
  int order = 1;
  // Cardinal-index mode: every summary polynomial lifted to degree n and
  // weighed with `cii_weights` (degree n - order).
  bool cii = false;
  std::span<const double> cii_weights;

  std::span<const double> scale() const {
    return unit ? unit->complement(storage)
                : tables->grid().one_plus_y_power(storage, 0);
  }
  std::span<const double> shift() const {
    return unit ? unit->points(storage) : tables->grid().points(storage);
  }
  std::span<const double> power(int k) const {
    return unit ? unit->ones(storage)
                : tables->grid().one_plus_y_power(storage, k);
  }
  int node_degree(int v) const {
    return cii ? n_features : edges.subtree_degree[v];
  }
  // psi weights for a quotient of nominal degree d.
  std::span<const double> weights(int d) const {
    if (cii) return cii_weights;
    return unit ? unit->integral_weights(storage)
                : tables->psi_vector(storage, d);
  }
  // kappa of a polynomial of nominal degree d given by its values.
  double kappa(const Vec& values, int d) const {
    if (unit) {
      return std::ldexp(poly::inner(values, unit->midpoint_weights(storage)), d);
    }
    return poly::kappa(poly::InterpPoly{d, values}, *tables);
  }
};

// Per-feature state along the current root-to-node path.
struct Slot {
  double p = 1.0;
  bool seen = false;
  int last_degree = 0;
  Vec inv;
};

// A feature's state before the current edge was entered.
struct OldSlot {
  double p;
  bool seen;
  int last_degree;
  std::span<const double> inv;
};

// Shared skeleton: maintains C = prod over seen features of (p_j + y) and
// returns the aggregated summary polynomial of every subtree. Derived
// traversals add scores at each edge once the child's polynomial is known.
template <typename Derived>
class TraversalBase {
 protected:
  explicit TraversalBase(const TreeContext& ctx)
      : ctx_(ctx), slots_(ctx.n_features), c_(ctx.storage + 1, 1.0) {
    for (Slot& slot : slots_) slot.inv.assign(ctx.storage + 1, 0.0);
  }

  // Writes the summary polynomial of the subtree at v into `out`.
  void traverse(int v, std::size_t depth, Vec& out) {
    const TreeModel& tree = ctx_.tree;
    const int g = ctx_.storage;
    out.resize(g + 1);
    if (tree.is_leaf(v)) {
      const double r = ctx_.edges.r_empty[v];
      if (ctx_.cii) {
        const auto lift = ctx_.power(ctx_.n_features - ctx_.edges.path_degree[v]);
        for (int k = 0; k <= g; ++k) out[k] = c_[k] * r * lift[k];
      } else {
        for (int k = 0; k <= g; ++k) out[k] = c_[k] * r;
      }
      return;
    }
    if (frames_.size() <= depth) frames_.emplace_back();
    Frame& frame = frames_[depth];
    const int deg_v = ctx_.node_degree(v);
    const int i = tree.feature[v];
    const auto scale = ctx_.scale();
    const auto shift = ctx_.shift();
    std::fill(out.begin(), out.end(), 0.0);
    for (int c : {tree.left[v], tree.right[v]}) {
      Slot& slot = slots_[i];
      const bool followed = routes_to(tree, v, c, ctx_.x);
      const double p_new =
          followed && (!slot.seen || slot.p != 0.0) ? ctx_.edges.p_raw[c] : 0.0;
      frame.old_inv.swap(slot.inv);
      frame.old_c.swap(c_);
      fill_inverse_factor(p_new, scale, shift, slot.inv);
      const OldSlot old{slot.p, slot.seen, slot.last_degree, frame.old_inv};
      c_.resize(g + 1);
      if (old.seen) {
        for (int k = 0; k <= g; ++k) {
          c_[k] = frame.old_c[k] * (p_new * scale[k] + shift[k]) * old.inv[k];
        }
      } else {
        for (int k = 0; k <= g; ++k) {
          c_[k] = frame.old_c[k] * (p_new * scale[k] + shift[k]);
        }
        seen_order_.push_back(i);
      }
      slot.p = p_new;
      slot.seen = true;
      slot.last_degree = ctx_.node_degree(c);
      static_cast<Derived*>(this)->enter_edge(i, c, old);

      traverse(c, depth + 1, frame.child);
      static_cast<Derived*>(this)->leave_edge(i, c, frame.child, old);

      if (!old.seen) seen_order_.pop_back();
      slot.p = old.p;
      slot.seen = old.seen;
      slot.last_degree = old.last_degree;
      slot.inv.swap(frame.old_inv);
      c_.swap(frame.old_c);
      const auto lift = ctx_.power(deg_v - ctx_.node_degree(c));
      for (int k = 0; k <= g; ++k) out[k] += frame.child[k] * lift[k];
    }
  }

  void run_root() {
    Vec root;
    traverse(0, 0, root);
  }

  const TreeContext& ctx_;
  std::vector<Slot> slots_;
  std::vector<int> seen_order_;
  Vec c_;

 private:
  // Scratch reused by every node at one depth.
  struct Frame {
    Vec old_inv;
    Vec old_c;
    Vec child;
  };
  // A deque keeps frame references valid while deeper frames are added.
  std::deque<Frame> frames_;
};

// Scores touched only by subsets whose features have all been seen. The
// interaction polynomial's coefficient sum is evaluated in closed form
// (it is the polynomial's value at 1), so subsets that include a feature
// outside the path never receive any contribution.
class RestrictedTraversal : public TraversalBase<RestrictedTraversal> {
 public:
  RestrictedTraversal(const TreeContext& ctx, ScoreTable& scores)
      : TraversalBase(ctx), scores_(scores) {}

  void run() { run_root(); }

  void enter_edge(int, int, const OldSlot&) {}

  void leave_edge(int i, int c, const Vec& g_c, const OldSlot& old) {
    const int s = ctx_.order;
    others_.clear();
    for (int j : seen_order_) {
      if (j != i) others_.push_back(j);
    }
    if (static_cast<int>(others_.size()) < s - 1) return;
    const int g = ctx_.storage;
    const int deg_c = ctx_.node_degree(c);
    const Slot& current = slots_[i];

    u_.assign(g + 1, 0.0);
    const auto w_new = ctx_.weights(deg_c - s);
    for (int k = 0; k <= g; ++k) u_[k] = g_c[k] * current.inv[k] * w_new[k];

    // Correction vectors keyed by the ancestor degree, built on demand and
    // valid for the current edge only.
    const std::size_t degrees = static_cast<std::size_t>(ctx_.node_degree(0)) + 1;
    if (corrections_.size() < degrees) {
      corrections_.resize(degrees);
      correction_stamp_.resize(degrees, 0);
    }
    ++edge_stamp_;
    edge_ = EdgeTerm{i, current.p - 1.0, old.seen, old.p - 1.0,
                     old.last_degree, g_c.data(), old.inv.data(), deg_c};

    prefix_.resize(s);
    prefix_[0].assign(g + 1, 1.0);
    members_.resize(s - 1);
    enumerate(0, 0, 1.0, std::numeric_limits<int>::max());
  }

 private:
  struct EdgeTerm {
    int feature;
    double a_new;
    bool had_old;
    double a_old;
    int old_degree;
    const double* g_c;
    const double* inv_old;
    int deg_c;
  };

  const Vec& correction(int da) {
    Vec& v = corrections_[da];
    if (correction_stamp_[da] == edge_stamp_) return v;
    correction_stamp_[da] = edge_stamp_;
    const int g = ctx_.storage;
    const auto lift = ctx_.power(da - edge_.deg_c);
    const auto w = ctx_.weights(da - ctx_.order);
    v.resize(g + 1);
    for (int k = 0; k <= g; ++k) {
      v[k] = edge_.g_c[k] * edge_.inv_old[k] * lift[k] * w[k];
    }
    return v;
  }

  void enumerate(int level, std::size_t start, double kprod, int min_degree) {
    const int s = ctx_.order;
    const Vec& p = prefix_[level];
    if (level == s - 1) {
      double score = edge_.a_new * kprod * poly::inner(p, u_);
      if (edge_.had_old) {
        const int da = std::min(edge_.old_degree, min_degree);
        score -= edge_.a_old * kprod * poly::inner(p, correction(da));
      }
      subset_.assign(members_.begin(), members_.end());
      subset_.push_back(edge_.feature);
      std::sort(subset_.begin(), subset_.end());
      scores_.add(subset_, score);
      return;
    }
    const int g = ctx_.storage;
    for (std::size_t idx = start; idx < others_.size(); ++idx) {
      const int j = others_[idx];
      const Slot& slot = slots_[j];
      Vec& next = prefix_[level + 1];
      next.resize(g + 1);
      for (int k = 0; k <= g; ++k) next[k] = p[k] * slot.inv[k];
      members_[level] = j;
      enumerate(level + 1, idx + 1, kprod * (slot.p - 1.0),
                std::min(min_degree, slot.last_degree));
    }
  }

  ScoreTable& scores_;
  std::vector<int> others_;
  std::vector<int> members_;
  std::vector<int> subset_;
  std::vector<Vec> prefix_;
  std::vector<Vec> corrections_;
  std::vector<std::uint64_t> correction_stamp_;
  std::uint64_t edge_stamp_ = 0;
  Vec u_;
  EdgeTerm edge_{};
};

// Literal traversal threading interaction and quotient polynomials for
// every subset of the requested order, whether or not its features have
// occurred. Unseen features enter both polynomials with p = 1.
class AllSubsetsTraversal : public TraversalBase<AllSubsetsTraversal> {
 public:
  AllSubsetsTraversal(const TreeContext& ctx, ScoreTable& scores)
      : TraversalBase(ctx), scores_(scores) {
    const int s = ctx.order;
    subsets_ = all_subsets(ctx.n_features, s);
    containing_.resize(ctx.n_features);
    const int g = ctx.storage;
    const auto scale = ctx.scale();
    const auto shift = ctx.shift();
    Vec ip(g + 1), qp(g + 1);
    for (int k = 0; k <= g; ++k) {
      ip[k] = std::pow(scale[k] - shift[k], s);
      qp[k] = std::pow(scale[k] + shift[k], s);
    }
    frames_.resize(subsets_.size());
    for (std::size_t idx = 0; idx < subsets_.size(); ++idx) {
      frames_[idx] = Frame{ip, qp, -1};
      for (int j : subsets_[idx]) containing_[j].push_back(idx);
    }
  }

  void run() { run_root(); }

  void enter_edge(int i, int c, const OldSlot& old) {
    const int g = ctx_.storage;
    const auto scale = ctx_.scale();
    const auto shift = ctx_.shift();
    const double p_old = old.seen ? old.p : 1.0;
    const double p_new = slots_[i].p;
    auto& saved = saved_.emplace_back();
    saved.reserve(containing_[i].size());
    for (std::size_t idx : containing_[i]) {
      Frame& f = frames_[idx];
      saved.push_back(f);
      for (int k = 0; k <= g; ++k) {
        f.ip[k] *= (p_new * scale[k] - shift[k]) / (p_old * scale[k] - shift[k]);
        f.qp[k] *= (p_new * scale[k] + shift[k]) / (p_old * scale[k] + shift[k]);
      }
      f.last_degree = ctx_.node_degree(c);
    }
  }

  void leave_edge(int i, int c, const Vec& g_c, const OldSlot&) {
    const int s = ctx_.order;
    const int deg_c = ctx_.node_degree(c);
    const auto& saved = saved_.back();
    for (std::size_t n = 0; n < containing_[i].size(); ++n) {
      const std::size_t idx = containing_[i][n];
      const Frame& now = frames_[idx];
      const Frame& before = saved[n];
      double term = 0.0;
      if (deg_c - s >= 0) {
        term += quotient_term(now, g_c, deg_c, deg_c);
      }
      if (before.last_degree >= 0 && before.last_degree - s >= 0) {
        term -= quotient_term(before, g_c, deg_c, before.last_degree);
      }
      scores_.add(subsets_[idx], term);
      frames_[idx] = before;
    }
    saved_.pop_back();
  }

 private:
  struct Frame {
    Vec ip;
    Vec qp;
    int last_degree;
  };

  // kappa(IP) * psi(G_c (1+y)^(degree - deg_c) / QP) at nominal degree
  // `degree` - order.
  double quotient_term(const Frame& f, const Vec& g_c, int deg_c, int degree) {
    const int g = ctx_.storage;
    const int s = ctx_.order;
    const double k = ctx_.kappa(f.ip, s);
    const auto lift = ctx_.power(degree - deg_c);
    const auto w = ctx_.weights(degree - s);
    double acc = 0.0;
    for (int j = 0; j <= g; ++j) acc += g_c[j] * lift[j] / f.qp[j] * w[j];
    return k * acc;
  }

  ScoreTable& scores_;
  std::vector<Subset> subsets_;
  std::vector<std::vector<std::size_t>> containing_;
  std::vector<Frame> frames_;
  std::vector<std::vector<Frame>> saved_;
};

// Order-1 recursion: no subset machinery, quotients by direct division.
class ShapleyTraversal : public TraversalBase<ShapleyTraversal> {
 public:
  ShapleyTraversal(const TreeContext& ctx, ScoreTable& scores)
      : TraversalBase(ctx), scores_(scores) {}

  void run() { run_root(); }

  void enter_edge(int, int, const OldSlot&) {}

  void leave_edge(int i, int c, const Vec& g_c, const OldSlot& old) {
    const int g = ctx_.storage;
    const int deg_c = ctx_.node_degree(c);
    const auto scale = ctx_.scale();
    const auto shift = ctx_.shift();
    const double p_new = slots_[i].p;
    const auto w_new = ctx_.weights(deg_c - 1);
    double gain = 0.0;
    for (int k = 0; k <= g; ++k) gain += g_c[k] / (p_new * scale[k] + shift[k]) * w_new[k];
    double phi = (p_new - 1.0) * gain;
    if (old.seen) {
      const int da = old.last_degree;
      const auto lift = ctx_.power(da - deg_c);
      const auto w_old = ctx_.weights(da - 1);
      double loss = 0.0;
      for (int k = 0; k <= g; ++k) {
        loss += g_c[k] * lift[k] / (old.p * scale[k] + shift[k]) * w_old[k];
      }
      phi -= (old.p - 1.0) * loss;
    }
    const int subset[1] = {i};
    scores_.add(subset, phi);
  }

 private:
  ScoreTable& scores_;
};

}  // namespace

std::string index_label(poly::IndexKind kind) {
  switch (kind) {
    case poly::IndexKind::kSii:
      return "sii";
    case poly::IndexKind::kBanzhaf:
      return "banzhaf";
    case poly::IndexKind::kCustom:
      return "custom";
  }
  return "unknown";
}

Explainer::Explainer(const Ensemble& ensemble) : ensemble_(ensemble) {
  validate(ensemble_);
  baseline_ = ensemble_.baseline_offset;
  edges_.reserve(ensemble_.trees.size());
  for (const TreeModel& tree : ensemble_.trees) {
    edges_.push_back(precompute_edge_tables(tree));
    const EdgeTables& e = edges_.back();
    for (int v = 0; v < tree.size(); ++v) {
      if (tree.is_leaf(v)) baseline_ += e.r_empty[v];
    }
    max_tree_degree_ = std::max(max_tree_degree_, e.max_degree);
  }
}

const poly::WeightTables& Explainer::tables(int degree) const {
  std::lock_guard<std::mutex> lock(tables_mutex_);
  const auto it = tables_.lower_bound(degree);
  if (it != tables_.end()) return *it->second;
  auto built = std::make_unique<poly::WeightTables>(degree);
  const poly::WeightTables& ref = *built;
  tables_.emplace(degree, std::move(built));
  return ref;
}

const poly::UnitGrid& Explainer::unit_grid(int degree) const {
  std::lock_guard<std::mutex> lock(tables_mutex_);
  const auto it = unit_grids_.lower_bound(degree);
  if (it != unit_grids_.end()) return *it->second;
  auto built = std::make_unique<poly::UnitGrid>(degree);
  const poly::UnitGrid& ref = *built;
  unit_grids_.emplace(degree, std::move(built));
  return ref;
}

InteractionResult Explainer::explain(std::span<const double> x,
                                     const ExplainConfig& config) const {
  const int n = n_features();
  check_instance(ensemble_, x);
  check_order(config.order, n);
  const int s = config.order;
  const bool cii = config.index.kind != poly::IndexKind::kSii;
  const bool all_subsets = config.mode == TraversalMode::kAllSubsets;
  const bool unit = config.grid == GridKind::kUnitInterval;

  // Lifts are the identity on the homogenized grid, so its storage only has
  // to hold the tree's own degree. The all-subset traversal divides by
  // (1 - 2t) for unseen features, which vanishes on the middle node of an
  // odd-sized set.
  auto storage_for = [&](const EdgeTables& e) {
    const int degree = all_subsets ? std::max(e.max_degree, s) : e.max_degree;
    if (unit) return all_subsets ? poly::zero_free_degree(degree) : degree;
    return poly::zero_free_degree(cii ? n : degree);
  };
  int max_storage = 1;
  for (const EdgeTables& e : edges_) {
    max_storage = std::max(max_storage, storage_for(e));
  }
  const int limit = unit ? poly::kMaxUnitDegree : poly::kMaxDegree;
  if (max_storage > limit) {
    throw LimitError("polynomial degree " + std::to_string(max_storage) +
                     " exceeds the supported maximum " + std::to_string(limit));
  }
  const poly::WeightTables* wt = unit ? nullptr : &tables(max_storage);
  const poly::UnitGrid* ug = unit ? &unit_grid(max_storage) : nullptr;

  InteractionResult result;
  result.order = s;
  result.index = index_label(config.index.kind);
  result.baseline = baseline_;
  result.prediction = predict(ensemble_, x);
  result.scores = ScoreTable(n, s);

  std::map<int, Vec> cii_weights;
  for (std::size_t t = 0; t < ensemble_.trees.size(); ++t) {
    const int storage = storage_for(edges_[t]);
    std::span<const double> weights;
    if (cii) {
      auto it = cii_weights.find(storage);
      if (it == cii_weights.end()) {
        Vec w = unit ? poly::unit_cii_weight_table(config.index, n, s, *ug,
                                                   storage)
                     : poly::cii_weight_table(config.index, n, s, *wt, storage);
        it = cii_weights.emplace(storage, std::move(w)).first;
      }
      weights = it->second;
    }
    TreeContext ctx{ensemble_.trees[t], edges_[t], x, wt, ug,
                    storage, n, s, cii, weights};
    if (all_subsets) {
      AllSubsetsTraversal(ctx, result.scores).run();
    } else {
      RestrictedTraversal(ctx, result.scores).run();
    }
  }
  result.scores.apply_floor(config.zero_floor);
  return result;
}

InteractionResult Explainer::explain_sv(std::span<const double> x,
                                        GridKind grid) const {
  const int n = n_features();
  check_instance(ensemble_, x);
  const bool unit = grid == GridKind::kUnitInterval;
  auto storage_for = [&](const EdgeTables& e) {
    return unit ? e.max_degree : poly::zero_free_degree(e.max_degree);
  };
  int max_storage = 1;
  for (const EdgeTables& e : edges_) {
    max_storage = std::max(max_storage, storage_for(e));
  }
  const int limit = unit ? poly::kMaxUnitDegree : poly::kMaxDegree;
  if (max_storage > limit) {
    throw LimitError("polynomial degree " + std::to_string(max_storage) +
                     " exceeds the supported maximum " + std::to_string(limit));
  }
  const poly::WeightTables* wt = unit ? nullptr : &tables(max_storage);
  const poly::UnitGrid* ug = unit ? &unit_grid(max_storage) : nullptr;
  InteractionResult result;
  result.order = 1;
  result.index = "sii";
  result.baseline = baseline_;
  result.prediction = predict(ensemble_, x);
  result.scores = ScoreTable(n, 1);
  for (std::size_t t = 0; t < ensemble_.trees.size(); ++t) {
    TreeContext ctx{ensemble_.trees[t], edges_[t], x, wt, ug,
                    storage_for(edges_[t]), n, 1, false, {}};
    ShapleyTraversal(ctx, result.scores).run();
  }
  result.scores.apply_floor(kZeroFloor);
  return result;
}

std::vector<InteractionResult> Explainer::explain_sii_orders(
    std::span<const double> x, int max_order) const {
  check_order(max_order, n_features());
  std::vector<InteractionResult> out;
  for (int s = 1; s <= max_order; ++s) {
    ExplainConfig config;
    config.order = s;
    // Aggregation needs the unfloored values; the floor is applied after.
    config.zero_floor = 0.0;
    out.push_back(explain(x, config));
  }
  return out;
}

std::vector<InteractionResult> Explainer::explain_nsii(std::span<const double> x,
                                                       int max_order) const {
  return aggregate_nsii(explain_sii_orders(x, max_order));
}

InteractionResult explain_interactions(const Ensemble& ensemble,
                                       std::span<const double> x,
                                       const ExplainConfig& config) {
  return Explainer(ensemble).explain(x, config);
}

InteractionResult explain_sv(const Ensemble& ensemble,
                             std::span<const double> x, GridKind grid) {
  return Explainer(ensemble).explain_sv(x, grid);
}

std::vector<InteractionResult> explain_nsii(const Ensemble& ensemble,
                                            std::span<const double> x,
                                            int max_order) {
  return Explainer(ensemble).explain_nsii(x, max_order);
}

}  // namespace treeint
