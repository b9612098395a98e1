#ifndef TREEINT_ENGINE_H_
#define TREEINT_ENGINE_H_

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "treeint/poly.h"
#include "treeint/subsets.h"
#include "treeint/treemodel.h"

namespace treeint {

// Scores with magnitude below this are reported as exactly 0.
inline constexpr double kZeroFloor = 1e-13;

enum class TraversalMode {
  // Touch a subset only once all of its features occurred on the path.
  kRestricted,
  // Thread interaction and quotient polynomials for every subset along
  // every path. Quadratic blowup; kept as an independent cross-check.
  kAllSubsets,
};

enum class GridKind {
  // Nodes of (0, 1) in t = y / (1 + y). Accurate for any path degree.
  kUnitInterval,
  // First-kind Chebyshev nodes in y. The Vandermonde-based weights lose
  // about one digit per two degrees of path length beyond ~12.
  kChebyshev,
};

struct ExplainConfig {
  int order = 1;
  poly::CiiSpec index;
  TraversalMode mode = TraversalMode::kRestricted;
  GridKind grid = GridKind::kUnitInterval;
  double zero_floor = kZeroFloor;
};

struct InteractionResult {
  int order = 0;
  // "sii", "banzhaf", "custom" or "n-sii".
  std::string index;
  double baseline = 0.0;
  double prediction = 0.0;
  ScoreTable scores;
};

std::string index_label(poly::IndexKind kind);

// Holds per-tree precomputation for one ensemble. Thread-safe: explain calls
// may run concurrently.
class Explainer {
 public:
  explicit Explainer(const Ensemble& ensemble);

  const Ensemble& ensemble() const { return ensemble_; }
  int n_features() const { return ensemble_.n_features; }
  // Prediction with no feature known: offset plus weighted leaf averages.
  double baseline() const { return baseline_; }

  // All scores of one order (SII or another cardinal index).
  InteractionResult explain(std::span<const double> x,
                            const ExplainConfig& config) const;

  // Shapley values through the dedicated order-1 recursion.
  InteractionResult explain_sv(
      std::span<const double> x,
      GridKind grid = GridKind::kUnitInterval) const;

  // SII of every order 1..max_order.
  std::vector<InteractionResult> explain_sii_orders(std::span<const double> x,
                                                    int max_order) const;

  // n-SII scores for orders 1..max_order.
  std::vector<InteractionResult> explain_nsii(std::span<const double> x,
                                              int max_order) const;

  // Weight tables covering storage degree `degree` (cached).
  const poly::WeightTables& tables(int degree) const;
  // Homogenized node sets up to degree `degree` (cached).
  const poly::UnitGrid& unit_grid(int degree) const;

 private:
  Ensemble ensemble_;
  std::vector<EdgeTables> edges_;
  double baseline_ = 0.0;
  int max_tree_degree_ = 0;

  mutable std::mutex tables_mutex_;
  mutable std::map<int, std::unique_ptr<poly::WeightTables>> tables_;
  mutable std::map<int, std::unique_ptr<poly::UnitGrid>> unit_grids_;
};

// Convenience wrappers building a temporary Explainer.
InteractionResult explain_interactions(const Ensemble& ensemble,
                                       std::span<const double> x,
                                       const ExplainConfig& config);
InteractionResult explain_sv(const Ensemble& ensemble,
                             std::span<const double> x,
                             GridKind grid = GridKind::kUnitInterval);
std::vector<InteractionResult> explain_nsii(const Ensemble& ensemble,
                                            std::span<const double> x,
                                            int max_order);

// Bernoulli numbers B_0..B_m with B_1 = -1/2.
std::vector<double> bernoulli_numbers(int m);

// Aggregates SII of orders 1..s0 (sii[k-1] has order k) into n-SII:
// nSII(S) = sum over T containing S, |T| <= s0, of B_{|T|-|S|} SII(T).
std::vector<InteractionResult> aggregate_nsii(
    const std::vector<InteractionResult>& sii, double zero_floor = kZeroFloor);

struct OrderMass {
  int order = 0;
  double positive = 0.0;
  double negative = 0.0;
};

struct FeatureStack {
  int feature = 0;
  std::vector<OrderMass> orders;
  double total() const;
};

// Splits each order-k score into k equal shares credited to its members,
// keeping positive and negative mass apart.
std::vector<FeatureStack> nsii_feature_distribution(
    const std::vector<InteractionResult>& results);

// baseline + sum of all scores - prediction.
double efficiency_residual(const std::vector<InteractionResult>& results);

}  // namespace treeint

#endif  // TREEINT_ENGINE_H_
