#pragma once

#include <cstdint>
#include <optional>

#include "mdpsmd/mdp.hpp"
#include "mdpsmd/smd.hpp"

namespace mdpsmd {

struct ConstrainedConfig {
  int K = 0;
  double d_max = 0.0;  // max |[d_k]_ia|
  double M = 0.0;      // 2 d_max t_mix
  double box_radius = 0.0;
  double eps = 0.0;    // internal accuracy
  SmdSchedule schedule;
};

// g = e_i - e_j with (i,a) ~ mu, j ~ p_ij(a); unbiased for (Ihat - P)^T mu.
BoundedEstimator estimator_v_constrained(const MdpInstance& mdp, const GenerativeModel& gen);

// g = K [d_k]_ia e_k - 1 with (i,a) ~ mu, k uniform; unbiased for D^T mu - 1.
BoundedEstimator estimator_s(const MdpInstance& mdp);

// g = |A| (v_i - v_j + [d_k]_ia ||s||_1) e_ia with (i,a) uniform, j ~ p,
// k ~ s_k/||s||_1 (the D term vanishes at s = 0 and k is skipped);
// unbiased for (Ihat - P) v + D s.
BoundedEstimator estimator_mu_constrained(const MdpInstance& mdp, const GenerativeModel& gen,
                                          double M);

// Closed-form gap of the constrained minimax problem at a feasible triple.
double exact_constrained_gap(const ConstrainedConfig& cfg, const MdpInstance& mdp, const Vec& v,
                             const Vec& s, const Vec& mu);

void constrained_exact_gradients(const MdpInstance& mdp, const Vec& v, const Vec& s,
                                 const Vec& mu, Vec& gv, Vec& gs, Vec& gmu);

// Rescale columns d_k <- d_k / c_k, reducing D^T mu >= c to D^T mu >= 1.
Mat rescale_constraints(const Mat& D, const Vec& c);

struct ConstrainedSolveOptions {
  std::optional<int> t_mix;
  long long max_iters = 0;
  int checkpoint_count = 16;
  AverageMode mode = AverageMode::Lazy;
  SmdConstants constants;
  double internal_eps_factor = 0.5;  // internal accuracy = factor * eps
};

struct ConstrainedSolveResult {
  SmdResult smd;
  Policy policy;
  ConstrainedConfig cfg;
  // With mu rebuilt from the exact stationary distribution of the policy:
  double min_dmu = 0.0;          // min_k (D^T mu)_k
  double stationarity_l1 = 0.0;  // ||(Ihat - P)^T mu||_1
};

ConstrainedSolveResult solve_constrained(const MdpInstance& mdp, double eps, uint64_t seed,
                                         const ConstrainedSolveOptions& options = {});

}  // namespace mdpsmd
