#pragma once

#include <cstdint>
#include <optional>

#include "mdpsmd/mdp.hpp"
#include "mdpsmd/smd.hpp"

namespace mdpsmd {

enum class MdpMode { Mixing, Discounted };

struct MdpSaddleConfig {
  MdpMode mode = MdpMode::Mixing;
  double M = 0.0;        // 2 t_mix (mixing) or 1/(1-gamma) (discounted)
  double box_radius = 0.0;  // 2M
  double eps = 0.0;         // internal minimax accuracy
  SmdSchedule schedule;
};

// g = e_j - e_i with (i,a) ~ mu, j ~ p_ij(a); unbiased for (P - Ihat)^T mu.
BoundedEstimator estimator_v_mixing(const MdpInstance& mdp, const GenerativeModel& gen);

// g = |A| (v_i - v_j - r_ia) e_ia with (i,a) uniform; unbiased for
// (Ihat - P) v - r.
BoundedEstimator estimator_mu_mixing(const MdpInstance& mdp, const GenerativeModel& gen,
                                     double M);

// g = (1-gamma) e_i' + gamma e_j - e_i; unbiased for (1-gamma) q + (gamma P - Ihat)^T mu.
BoundedEstimator estimator_v_discounted(const MdpInstance& mdp, const GenerativeModel& gen);

// g = |A| (v_i - gamma v_j - r_ia) e_ia; unbiased for (Ihat - gamma P) v - r.
BoundedEstimator estimator_mu_discounted(const MdpInstance& mdp, const GenerativeModel& gen,
                                         double M);

// Closed-form duality gap of the MDP minimax problem at feasible (v, mu).
double exact_mdp_gap(const MdpSaddleConfig& cfg, const MdpInstance& mdp, const Vec& v,
                     const Vec& mu);

// Exact gradients at (v, mu); test and certification helper.
void mdp_exact_gradients(const MdpSaddleConfig& cfg, const MdpInstance& mdp, const Vec& v,
                         const Vec& mu, Vec& gv, Vec& gmu);

// lambda_i = sum_a mu_ia; pi_i = mu_i,. / lambda_i (uniform when lambda_i ~ 0).
Policy round_to_policy(const Vec& mu, const MdpInstance& mdp);

struct MdpSolveOptions {
  std::optional<int> t_mix;        // override the oracle
  long long max_iters = 0;         // 0 = full schedule
  int checkpoint_count = 16;
  AverageMode mode = AverageMode::Lazy;
  SmdConstants constants;
  bool with_oracle_subopt = true;  // evaluate policy suboptimality at checkpoints
};

struct MdpSolveResult {
  SmdResult smd;
  Policy policy;
  MdpSaddleConfig cfg;
  std::optional<double> subopt;  // exact v_bar* - v_bar^pi when oracle ran
  long long generative_samples = 0;
};

MdpSolveResult solve_mdp(const MdpInstance& mdp, double eps, uint64_t seed,
                         const MdpSolveOptions& options = {});

}  // namespace mdpsmd
