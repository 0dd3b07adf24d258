#include "mdpsmd/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

AliasTable::AliasTable(const Vec& weights) {
  n_ = static_cast<int>(weights.size());
  if (n_ == 0) throw std::domain_error("alias_build: empty weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("alias_build: negative or non-finite weight");
    total += w;
  }
  if (total <= 0.0) throw std::domain_error("alias_build: all-zero weights");

  prob_.assign(n_, 0.0);
  alias_.assign(n_, -1);
  Vec scaled(n_);
  for (int i = 0; i < n_; ++i) scaled[i] = weights[i] * n_ / total;

  std::vector<int> small, large;
  small.reserve(n_);
  large.reserve(n_);
  for (int i = 0; i < n_; ++i) (scaled[i] < 1.0 ? small : large).push_back(i);

  while (!small.empty() && !large.empty()) {
    int s = small.back();
    int l = large.back();
    small.pop_back();
    large.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] -= 1.0 - scaled[s];
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  for (int i : large) prob_[i] = 1.0;
  for (int i : small) prob_[i] = 1.0;  // only reachable through rounding
}

int AliasTable::sample(RngStream& rng) const {
  int slot = rng.next_below(n_);
  if (slot >= n_) slot = n_ - 1;
  double u = rng.next_double();
  return (u < prob_[slot] || alias_[slot] < 0) ? slot : alias_[slot];
}

Vec AliasTable::reconstruct() const {
  Vec p(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    p[i] += prob_[i] / n_;
    if (alias_[i] >= 0) p[alias_[i]] += (1.0 - prob_[i]) / n_;
  }
  return p;
}

SumTree::SumTree(const Vec& weights) {
  n_ = static_cast<int>(weights.size());
  if (n_ == 0) throw std::domain_error("sum_tree: empty weights");
  for (double w : weights)
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::domain_error("sum_tree: negative or non-finite weight");
  cap_ = 1;
  while (cap_ < n_) cap_ <<= 1;
  leaves_ = weights;
  node_.assign(2 * static_cast<size_t>(cap_), 0.0);
  rebuild();
}

void SumTree::rebuild() {
  for (int i = 0; i < cap_; ++i) node_[cap_ + i] = i < n_ ? leaves_[i] : 0.0;
  for (int i = cap_ - 1; i >= 1; --i) node_[i] = node_[2 * i] + node_[2 * i + 1];
}

void SumTree::update(int index, double new_weight) {
  if (index < 0 || index >= n_) throw std::out_of_range("sum_tree update: index out of range");
  if (!(new_weight >= 0.0) || !std::isfinite(new_weight))
    throw std::domain_error("sum_tree update: negative or non-finite weight");
  leaves_[index] = new_weight;
  int i = cap_ + index;
  node_[i] = new_weight;
  for (i >>= 1; i >= 1; i >>= 1) node_[i] = node_[2 * i] + node_[2 * i + 1];
}

int SumTree::sample_u(double u) const {
  double total = node_[1];
  if (!(total > 0.0)) throw EmptyDistribution("sum_tree sample: zero total weight");
  double x = u * total;
  int i = 1;
  while (i < cap_) {
    double left = node_[2 * i];
    if (x < left) {
      i = 2 * i;
    } else {
      x -= left;
      i = 2 * i + 1;
    }
  }
  int idx = i - cap_;
  if (idx >= n_) idx = n_ - 1;
  // guard against landing on a zero-padding leaf through rounding
  while (idx > 0 && leaves_[idx] == 0.0) --idx;
  return idx;
}

int SumTree::sample(RngStream& rng) const { return sample_u(rng.next_double()); }

double SumTree::drift() const {
  double worst = 0.0;
  for (int i = 1; i < cap_; ++i) {
    double kids = node_[2 * i] + node_[2 * i + 1];
    double err = std::abs(node_[i] - kids) / (1.0 + std::abs(kids));
    worst = std::max(worst, err);
  }
  return worst;
}

int linear_scan_sample(const Vec& weights, RngStream& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw EmptyDistribution("linear_scan_sample: zero total weight");
  double x = rng.next_double() * total;
  int n = static_cast<int>(weights.size());
  for (int i = 0; i < n; ++i) {
    if (x < weights[i]) return i;
    x -= weights[i];
  }
  for (int i = n - 1; i >= 0; --i)
    if (weights[i] > 0.0) return i;
  return n - 1;
}

namespace {

// Regularized incomplete gamma P(a, x) by series / continued fraction.
double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  // Lentz continued fraction for Q(a, x)
  double b = x + 1.0 - a;
  double c = 1.0 / 1e-300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  double q = std::exp(-x + a * std::log(x) - gln) * h;
  return 1.0 - q;
}

}  // namespace

double chi_square_sf(double stat, int dof) {
  if (dof <= 0) throw std::domain_error("chi_square_sf: dof must be positive");
  if (stat <= 0.0) return 1.0;
  return 1.0 - gamma_p(0.5 * dof, 0.5 * stat);
}

double chi_square_test(const std::vector<long long>& counts, const Vec& probs) {
  if (counts.size() != probs.size()) throw std::invalid_argument("chi_square_test: size mismatch");
  long long total = 0;
  for (long long c : counts) total += c;
  double stat = 0.0;
  int dof = -1;
  for (size_t i = 0; i < counts.size(); ++i) {
    double expected = probs[i] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (counts[i] != 0) return 0.0;  // impossible category observed
      continue;
    }
    double diff = static_cast<double>(counts[i]) - expected;
    stat += diff * diff / expected;
    ++dof;
  }
  if (dof <= 0) return 1.0;
  return chi_square_sf(stat, dof);
}

}  // namespace mdpsmd
