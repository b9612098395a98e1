#include "treeint/oracle.h"

#include <algorithm>
#include <bit>
#include <random>
#include <string>

#include "treeint/error.h"

namespace treeint::oracle {

namespace {

double tree_value(const TreeModel& tree, std::span<const double> x,
                  std::uint64_t mask, int v) {
  if (tree.is_leaf(v)) return tree.value[v];
  const int f = tree.feature[v];
  if ((mask >> f) & 1U) {
    const int next = x[f] <= tree.threshold[v] ? tree.left[v] : tree.right[v];
    return tree_value(tree, x, mask, next);
  }
  const double wl = tree.edge_weight(v, tree.left[v]);
  const double wr = tree.edge_weight(v, tree.right[v]);
  return wl * tree_value(tree, x, mask, tree.left[v]) +
         wr * tree_value(tree, x, mask, tree.right[v]);
}

void check_players(int n) {
  if (n > 64) {
    throw LimitError("coalition bitmasks support at most 64 features, model has " +
                     std::to_string(n));
  }
}

}  // namespace

std::uint64_t to_mask(std::span<const int> features) {
  std::uint64_t mask = 0;
  for (int f : features) {
    if (f < 0 || f >= 64) throw InputError("feature index out of mask range");
    mask |= std::uint64_t{1} << f;
  }
  return mask;
}

double restricted_predict(const Ensemble& ensemble, std::span<const double> x,
                          std::uint64_t mask) {
  check_instance(ensemble, x);
  double total = ensemble.baseline_offset;
  for (const TreeModel& tree : ensemble.trees) total += tree_value(tree, x, mask, 0);
  return total;
}

double restricted_predict(const Ensemble& ensemble, std::span<const double> x,
                          std::span<const int> coalition) {
  check_players(ensemble.n_features);
  for (int f : coalition) {
    if (f < 0 || f >= ensemble.n_features) {
      throw InputError("coalition member " + std::to_string(f) + " out of range");
    }
  }
  return restricted_predict(ensemble, x, to_mask(coalition));
}

CoalitionGame::CoalitionGame(const Ensemble& ensemble, std::span<const double> x)
    : ensemble_(ensemble), x_(x.begin(), x.end()) {
  check_players(ensemble.n_features);
  check_instance(ensemble, x);
}

double CoalitionGame::value(std::uint64_t mask) {
  const auto it = memo_.find(mask);
  if (it != memo_.end()) return it->second;
  const double v = restricted_predict(ensemble_, x_, mask);
  memo_.emplace(mask, v);
  return v;
}

double s_derivative(CoalitionGame& game, std::uint64_t s_mask,
                    std::uint64_t t_mask) {
  if ((s_mask & t_mask) != 0) {
    throw InputError("S and T must be disjoint");
  }
  const int s = std::popcount(s_mask);
  double acc = 0.0;
  std::uint64_t l = s_mask;
  while (true) {
    const int sign = (s - std::popcount(l)) % 2 == 0 ? 1 : -1;
    acc += sign * game.value(t_mask | l);
    if (l == 0) break;
    l = (l - 1) & s_mask;
  }
  return acc;
}

WeightFn index_weights(const poly::CiiSpec& spec, int n, int s) {
  std::vector<double> table(n - s + 1);
  for (int t = 0; t <= n - s; ++t) table[t] = poly::cii_weight(spec, n, s, t);
  return [table = std::move(table)](int t) { return table.at(t); };
}

double brute_interaction(CoalitionGame& game, std::span<const int> subset,
                         const WeightFn& weight, const BruteOptions& options) {
  const int n = game.n_players();
  const int s = static_cast<int>(subset.size());
  if (n - s > kMaxFreePlayers) {
    throw LimitError("brute-force enumeration over " + std::to_string(n - s) +
                     " free features exceeds the limit of " +
                     std::to_string(kMaxFreePlayers));
  }
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0}
                                    : (std::uint64_t{1} << n) - 1;
  const std::uint64_t s_mask = to_mask(subset);
  if ((s_mask & ~all) != 0 || std::popcount(s_mask) != s) {
    throw InputError("invalid interaction subset");
  }
  const std::uint64_t free = all & ~s_mask;

  auto term = [&](std::uint64_t t_mask) {
    if (options.stats) {
      ++options.stats->coalitions;
      options.stats->sub_coalitions += std::uint64_t{1} << s;
    }
    return weight(std::popcount(t_mask)) * s_derivative(game, s_mask, t_mask);
  };

  double total = 0.0;
  if (options.shuffle_seed) {
    std::vector<std::uint64_t> order;
    order.reserve(std::size_t{1} << (n - s));
    for (std::uint64_t t = free;; t = (t - 1) & free) {
      order.push_back(t);
      if (t == 0) break;
    }
    std::mt19937_64 rng(*options.shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::uint64_t t : order) total += term(t);
    return total;
  }
  for (std::uint64_t t = free;; t = (t - 1) & free) {
    total += term(t);
    if (t == 0) break;
  }
  return total;
}

double brute_interaction(const Ensemble& ensemble, std::span<const double> x,
                         std::span<const int> subset, const WeightFn& weight) {
  CoalitionGame game(ensemble, x);
  return brute_interaction(game, subset, weight);
}

InteractionResult brute_all(const Ensemble& ensemble, std::span<const double> x,
                            int order, const poly::CiiSpec& index,
                            const BruteOptions& options) {
  const int n = ensemble.n_features;
  if (order < 1 || order > n) {
    throw InputError("interaction order " + std::to_string(order) +
                     " outside 1.." + std::to_string(n));
  }
  if (n - order > kMaxFreePlayers) {
    throw LimitError("brute-force enumeration over " +
                     std::to_string(n - order) +
                     " free features exceeds the limit of " +
                     std::to_string(kMaxFreePlayers));
  }
  CoalitionGame game(ensemble, x);
  InteractionResult result;
  result.order = order;
  result.index = index_label(index.kind);
  result.baseline = game.value(0);
  result.prediction = predict(ensemble, x);
  result.scores = ScoreTable(n, order);
  const WeightFn weight = index_weights(index, n, order);
  Subset subset(order);
  for (int i = 0; i < order; ++i) subset[i] = i;
  do {
    result.scores.add(subset, brute_interaction(game, subset, weight, options));
  } while (next_combination(subset, n));
  return result;
}

}  // namespace treeint::oracle
