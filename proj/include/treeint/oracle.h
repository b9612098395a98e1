#ifndef TREEINT_ORACLE_H_
#define TREEINT_ORACLE_H_

// Exponential-time reference: restricted-model evaluation and interaction
// indices by direct coalition enumeration.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "treeint/engine.h"
#include "treeint/poly.h"
#include "treeint/treemodel.h"

namespace treeint::oracle {

// Largest number of players outside S that brute_interaction enumerates.
inline constexpr int kMaxFreePlayers = 24;

// Prediction when only the features in `mask` are known; unknown splits
// average both children by their sample fractions.
double restricted_predict(const Ensemble& ensemble, std::span<const double> x,
                          std::uint64_t mask);
double restricted_predict(const Ensemble& ensemble, std::span<const double> x,
                          std::span<const int> coalition);

std::uint64_t to_mask(std::span<const int> features);

// f(x, T) for one instance with results memoized per coalition.
class CoalitionGame {
 public:
  CoalitionGame(const Ensemble& ensemble, std::span<const double> x);

  int n_players() const { return ensemble_.n_features; }
  double value(std::uint64_t mask);
  // Distinct coalitions evaluated so far.
  std::size_t evaluations() const { return memo_.size(); }

 private:
  const Ensemble& ensemble_;
  std::vector<double> x_;
  std::unordered_map<std::uint64_t, double> memo_;
};

// delta_S f(T) = sum over L subset of S of (-1)^(|S|-|L|) f(T u L).
double s_derivative(CoalitionGame& game, std::uint64_t s_mask,
                    std::uint64_t t_mask);

// Weight of a coalition T (outside S) by its size.
using WeightFn = std::function<double(int t)>;

WeightFn index_weights(const poly::CiiSpec& spec, int n, int s);

struct EnumerationStats {
  std::uint64_t coalitions = 0;
  std::uint64_t sub_coalitions = 0;
};

struct BruteOptions {
  // Visit coalitions in a shuffled order drawn from this seed.
  std::optional<std::uint64_t> shuffle_seed;
  EnumerationStats* stats = nullptr;
};

// sum over T subset of N \ S of w(|T|) delta_S f(T). Throws LimitError when
// n - |S| exceeds kMaxFreePlayers.
double brute_interaction(CoalitionGame& game, std::span<const int> subset,
                         const WeightFn& weight, const BruteOptions& options = {});
double brute_interaction(const Ensemble& ensemble, std::span<const double> x,
                         std::span<const int> subset, const WeightFn& weight);

// Every subset of one order through a single shared game.
InteractionResult brute_all(const Ensemble& ensemble, std::span<const double> x,
                            int order, const poly::CiiSpec& index = {},
                            const BruteOptions& options = {});

}  // namespace treeint::oracle

#endif  // TREEINT_ORACLE_H_
