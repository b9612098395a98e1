#ifndef TREEINT_SUBSETS_H_
#define TREEINT_SUBSETS_H_

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace treeint {

// A feature subset as a strictly increasing list of feature indices.
using Subset = std::vector<int>;

// Exact binomial coefficient. Throws LimitError if the value does not fit.
std::uint64_t binomial(int n, int k);

// Binomial coefficient as a double; symmetric in k <-> n-k bit for bit.
double binomial_real(int n, int k);

// Colexicographic rank of a sorted subset among all subsets of equal size.
std::uint64_t colex_rank(std::span<const int> sorted_subset);

// Advances `c` (sorted, values < n) to the next combination in
// lexicographic order. Returns false after the last one.
bool next_combination(std::vector<int>& c, int n);

// All subsets of {0..n-1} of size k in lexicographic order.
std::vector<Subset> all_subsets(int n, int k);

// Interaction scores for all subsets of one size. Dense storage indexes by
// colex rank; sparse storage keeps only touched subsets, and absent entries
// mean exactly zero.
class ScoreTable {
 public:
  // Dense storage is used up to this many features.
  static constexpr int kDenseFeatureLimit = 20;

  ScoreTable() = default;
  ScoreTable(int n_features, int order);

  int n_features() const { return n_features_; }
  int order() const { return order_; }
  bool dense() const { return dense_; }

  double get(std::span<const int> sorted_subset) const;
  void add(std::span<const int> sorted_subset, double value);
  // Dense-only fast path.
  void add_ranked(std::uint64_t rank, double value) { dense_values_[rank] += value; }

  // Sets every score with magnitude below `floor` to exactly 0.
  void apply_floor(double floor);

  // Nonzero entries in lexicographic subset order.
  std::vector<std::pair<Subset, double>> nonzero_entries() const;

  // Calls fn(subset, score) for every subset of the table's size, zeros
  // included, in lexicographic order. Sparse tables fall back to lookups.
  template <typename Fn>
  void for_each_dense(Fn&& fn) const {
    std::vector<int> c(order_);
    for (int i = 0; i < order_; ++i) c[i] = i;
    if (order_ > n_features_) return;
    do {
      const std::span<const int> subset(c);
      fn(subset, dense_ ? dense_values_[rank(subset)] : get(subset));
    } while (next_combination(c, n_features_));
  }

  double sum() const;

 private:
  std::uint64_t rank(std::span<const int> sorted_subset) const;

  int n_features_ = 0;
  int order_ = 0;
  bool dense_ = true;
  std::vector<double> dense_values_;
  // binomial(v, k + 1) at [k * n_features + v], for dense ranking.
  std::vector<std::uint64_t> rank_terms_;
  std::map<Subset, double> sparse_values_;
};

}  // namespace treeint

#endif  // TREEINT_SUBSETS_H_
