#include <string>

#include "treeint/engine.h"
#include "treeint/error.h"

namespace treeint {

std::vector<double> bernoulli_numbers(int m) {
  std::vector<long double> b(m + 1, 0.0L);
  b[0] = 1.0L;
  for (int j = 1; j <= m; ++j) {
    long double acc = 0.0L;
    for (int k = 0; k < j; ++k) acc += binomial_real(j + 1, k) * b[k];
    b[j] = -acc / (j + 1);
  }
  // The recursion leaves rounding noise where the exact value is zero.
  for (int j = 3; j <= m; j += 2) b[j] = 0.0L;
  return {b.begin(), b.end()};
}

std::vector<InteractionResult> aggregate_nsii(
    const std::vector<InteractionResult>& sii, double zero_floor) {
  const int s0 = static_cast<int>(sii.size());
  if (s0 == 0) throw InputError("n-SII needs at least one order");
  for (int k = 1; k <= s0; ++k) {
    if (sii[k - 1].order != k) {
      throw InputError("n-SII input orders must be 1.." + std::to_string(s0));
    }
  }
  const int n = sii[0].scores.n_features();
  const std::vector<double> bern = bernoulli_numbers(s0);
  std::vector<InteractionResult> out(s0);
  for (int k = 1; k <= s0; ++k) {
    InteractionResult& r = out[k - 1];
    r.order = k;
    r.index = "n-sii";
    r.baseline = sii[0].baseline;
    r.prediction = sii[0].prediction;
    r.scores = ScoreTable(n, k);
  }
  std::vector<int> pick;
  Subset part;
  for (int t = 1; t <= s0; ++t) {
    for (const auto& [superset, value] : sii[t - 1].scores.nonzero_entries()) {
      for (int k = 1; k <= t; ++k) {
        const double b = bern[t - k];
        if (b == 0.0) continue;
        pick.resize(k);
        for (int j = 0; j < k; ++j) pick[j] = j;
        do {
          part.resize(k);
          for (int j = 0; j < k; ++j) part[j] = superset[pick[j]];
          out[k - 1].scores.add(part, b * value);
        } while (next_combination(pick, t));
      }
    }
  }
  for (InteractionResult& r : out) r.scores.apply_floor(zero_floor);
  return out;
}

double FeatureStack::total() const {
  double sum = 0.0;
  for (const OrderMass& m : orders) sum += m.positive + m.negative;
  return sum;
}

std::vector<FeatureStack> nsii_feature_distribution(
    const std::vector<InteractionResult>& results) {
  if (results.empty()) return {};
  const int n = results[0].scores.n_features();
  std::vector<FeatureStack> stacks(n);
  for (int f = 0; f < n; ++f) {
    stacks[f].feature = f;
    for (const InteractionResult& r : results) {
      stacks[f].orders.push_back(OrderMass{r.order, 0.0, 0.0});
    }
  }
  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    const InteractionResult& r = results[idx];
    for (const auto& [subset, value] : r.scores.nonzero_entries()) {
      const double share = value / static_cast<double>(subset.size());
      for (int f : subset) {
        OrderMass& m = stacks[f].orders[idx];
        (share > 0.0 ? m.positive : m.negative) += share;
      }
    }
  }
  return stacks;
}

double efficiency_residual(const std::vector<InteractionResult>& results) {
  if (results.empty()) return 0.0;
  double total = results[0].baseline;
  for (const InteractionResult& r : results) total += r.scores.sum();
  return total - results[0].prediction;
}

}  // namespace treeint
