#pragma once

#include <vector>

#include "mdpsmd/linalg.hpp"
#include "mdpsmd/rng.hpp"

namespace mdpsmd {

// Walker/Vose alias table for O(1) draws from a fixed weight vector.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const Vec& weights);

  int sample(RngStream& rng) const;
  int size() const { return n_; }

  // Per-index probabilities induced by the table; used to validate the
  // construction against weights / sum(weights).
  Vec reconstruct() const;

 private:
  int n_ = 0;
  Vec prob_;
  std::vector<int> alias_;
};

// Complete binary tree over nonnegative weights supporting O(log n) updates
// and proportional sampling; the dual simplex iterate changes one coordinate
// per solver step, which this makes cheap.
class SumTree {
 public:
  SumTree() = default;
  explicit SumTree(const Vec& weights);

  int size() const { return n_; }
  double total() const { return node_[1]; }
  double weight(int index) const { return leaf(index); }

  void update(int index, double new_weight);
  int sample(RngStream& rng) const;
  int sample_u(double u) const;  // cumulative walk with an explicit uniform

  // Recompute every internal node exactly from the leaves.
  void rebuild();
  // Largest relative mismatch between a node and the sum of its children.
  double drift() const;

  const Vec& leaves() const { return leaves_; }

 private:
  double leaf(int index) const { return leaves_[index]; }

  int n_ = 0;
  int cap_ = 1;  // power of two
  Vec node_;     // 1-based heap layout; node_[1] = root
  Vec leaves_;
};

// Reference O(n) sampler over the same weights; retained as the correctness
// oracle for the sum tree.
int linear_scan_sample(const Vec& weights, RngStream& rng);

// Survival function of the chi-square distribution (upper tail probability).
double chi_square_sf(double stat, int dof);

// Pearson chi-square p-value of observed counts against expected
// probabilities (counts summed to derive N).
double chi_square_test(const std::vector<long long>& counts, const Vec& probs);

}  // namespace mdpsmd
