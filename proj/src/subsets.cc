#include "treeint/subsets.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "treeint/error.h"

namespace treeint {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t numerator = static_cast<std::uint64_t>(n - k + i);
    // result * numerator / i stays integral at every step.
    const std::uint64_t g = std::gcd(result, static_cast<std::uint64_t>(i));
    const std::uint64_t reduced = result / g;
    const std::uint64_t divisor = static_cast<std::uint64_t>(i) / g;
    if (reduced > std::numeric_limits<std::uint64_t>::max() / numerator) {
      throw LimitError("binomial(" + std::to_string(n) + ", " +
                       std::to_string(k) + ") overflows 64 bits");
    }
    result = reduced * (numerator / divisor);
  }
  return result;
}

double binomial_real(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return result;
}

std::uint64_t colex_rank(std::span<const int> sorted_subset) {
  std::uint64_t rank = 0;
  for (std::size_t k = 0; k < sorted_subset.size(); ++k) {
    rank += binomial(sorted_subset[k], static_cast<int>(k) + 1);
  }
  return rank;
}

bool next_combination(std::vector<int>& c, int n) {
  const int k = static_cast<int>(c.size());
  int i = k - 1;
  while (i >= 0 && c[i] == n - k + i) --i;
  if (i < 0) return false;
  ++c[i];
  for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  return true;
}

std::vector<Subset> all_subsets(int n, int k) {
  std::vector<Subset> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  do {
    out.push_back(c);
  } while (next_combination(c, n));
  return out;
}

ScoreTable::ScoreTable(int n_features, int order)
    : n_features_(n_features),
      order_(order),
      dense_(n_features <= kDenseFeatureLimit) {
  if (!dense_) return;
  dense_values_.assign(binomial(n_features, order), 0.0);
  rank_terms_.resize(static_cast<std::size_t>(order) * n_features);
  for (int k = 0; k < order; ++k) {
    for (int v = 0; v < n_features; ++v) {
      rank_terms_[static_cast<std::size_t>(k) * n_features + v] = binomial(v, k + 1);
    }
  }
}

std::uint64_t ScoreTable::rank(std::span<const int> sorted_subset) const {
  std::uint64_t r = 0;
  for (std::size_t k = 0; k < sorted_subset.size(); ++k) {
    r += rank_terms_[k * n_features_ + sorted_subset[k]];
  }
  return r;
}

double ScoreTable::get(std::span<const int> sorted_subset) const {
  if (dense_) return dense_values_[rank(sorted_subset)];
  const auto it =
      sparse_values_.find(Subset(sorted_subset.begin(), sorted_subset.end()));
  return it == sparse_values_.end() ? 0.0 : it->second;
}

void ScoreTable::add(std::span<const int> sorted_subset, double value) {
  if (dense_) {
    dense_values_[rank(sorted_subset)] += value;
  } else {
    sparse_values_[Subset(sorted_subset.begin(), sorted_subset.end())] += value;
  }
}

void ScoreTable::apply_floor(double floor) {
  if (dense_) {
    for (double& v : dense_values_) {
      if (std::abs(v) < floor) v = 0.0;
    }
    return;
  }
  for (auto it = sparse_values_.begin(); it != sparse_values_.end();) {
    if (std::abs(it->second) < floor) {
      it = sparse_values_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<std::pair<Subset, double>> ScoreTable::nonzero_entries() const {
  std::vector<std::pair<Subset, double>> out;
  if (!dense_) {
    for (const auto& [subset, value] : sparse_values_) {
      if (value != 0.0) out.emplace_back(subset, value);
    }
    return out;
  }
  for_each_dense([&](std::span<const int> subset, double value) {
    if (value != 0.0) out.emplace_back(Subset(subset.begin(), subset.end()), value);
  });
  return out;
}

double ScoreTable::sum() const {
  double total = 0.0;
  if (dense_) {
    for (double v : dense_values_) total += v;
  } else {
    for (const auto& [subset, value] : sparse_values_) total += value;
  }
  return total;
}

}  // namespace treeint
