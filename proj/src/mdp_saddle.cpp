#include "mdpsmd/mdp_saddle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

BoundedEstimator estimator_v_mixing(const MdpInstance& mdp, const GenerativeModel& gen) {
  BoundedEstimator est;
  est.bounds = {2.0, 2.0, NormKind::Euclidean};
  const MdpInstance* m = &mdp;
  const GenerativeModel* g = &gen;
  est.draw = [m, g](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = view.sample_dual(rng);
    int i = m->row_state[row];
    int j = g->sample(row, rng);
    if (i != j) {
      out.add(j, 1.0);
      out.add(i, -1.0);
    }
    return out;
  };
  return est;
}

BoundedEstimator estimator_mu_mixing(const MdpInstance& mdp, const GenerativeModel& gen,
                                     double M) {
  BoundedEstimator est;
  int A = mdp.total_pairs();
  est.bounds = {(2.0 * M + 1.0) * A, 9.0 * (M * M + 1.0) * A, NormKind::LocalSimplex};
  const MdpInstance* m = &mdp;
  const GenerativeModel* g = &gen;
  est.draw = [m, g, A](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = rng.next_below(A);
    int i = m->row_state[row];
    int j = g->sample(row, rng);
    out.add(row, A * (view.xv(i) - view.xv(j) - m->rewards[row]));
    return out;
  };
  return est;
}

BoundedEstimator estimator_v_discounted(const MdpInstance& mdp, const GenerativeModel& gen) {
  if (!mdp.q) throw ConfigError("estimator_v_discounted: instance has no initial distribution q");
  BoundedEstimator est;
  est.bounds = {2.0, 2.0, NormKind::Euclidean};
  const MdpInstance* m = &mdp;
  const GenerativeModel* g = &gen;
  auto q_alias = std::make_shared<AliasTable>(*mdp.q);
  double gamma = *mdp.gamma;
  est.draw = [m, g, q_alias, gamma](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = view.sample_dual(rng);
    int i = m->row_state[row];
    int j = g->sample(row, rng);
    int i2 = q_alias->sample(rng);
    out.add(i2, 1.0 - gamma);
    out.add(j, gamma);
    out.add(i, -1.0);
    return out;
  };
  return est;
}

BoundedEstimator estimator_mu_discounted(const MdpInstance& mdp, const GenerativeModel& gen,
                                         double M) {
  BoundedEstimator est;
  int A = mdp.total_pairs();
  est.bounds = {(2.0 * M + 1.0) * A, 9.0 * (M * M + 1.0) * A, NormKind::LocalSimplex};
  const MdpInstance* m = &mdp;
  const GenerativeModel* g = &gen;
  double gamma = *mdp.gamma;
  est.draw = [m, g, A, gamma](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = rng.next_below(A);
    int i = m->row_state[row];
    int j = g->sample(row, rng);
    out.add(row, A * (view.xv(i) - gamma * view.xv(j) - m->rewards[row]));
    return out;
  };
  return est;
}

namespace {

void check_mdp_pair(const MdpSaddleConfig& cfg, const MdpInstance& mdp, const Vec& v,
                    const Vec& mu) {
  if (static_cast<int>(v.size()) != mdp.S || static_cast<int>(mu.size()) != mdp.total_pairs())
    throw std::invalid_argument("mdp gap: dimension mismatch");
  if (linf_norm(v) > cfg.box_radius + 1e-9) throw std::domain_error("mdp gap: v outside box");
  double sum = 0.0;
  for (double w : mu) {
    if (w < -1e-9) throw std::domain_error("mdp gap: mu has negative entries");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("mdp gap: mu not on simplex");
}

}  // namespace

void mdp_exact_gradients(const MdpSaddleConfig& cfg, const MdpInstance& mdp, const Vec& v,
                         const Vec& mu, Vec& gv, Vec& gmu) {
  int A = mdp.total_pairs();
  double gamma = cfg.mode == MdpMode::Discounted ? *mdp.gamma : 1.0;
  gv.assign(mdp.S, 0.0);
  gmu.assign(A, 0.0);
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    const double* row = mdp.transitions.row_ptr(r);
    double pv = 0.0;
    for (int j = 0; j < mdp.S; ++j) {
      pv += row[j] * v[j];
      gv[j] += gamma * row[j] * mu[r];
    }
    gv[i] -= mu[r];
    gmu[r] = v[i] - gamma * pv - mdp.rewards[r];
  }
  if (cfg.mode == MdpMode::Discounted) {
    const Vec& q = *mdp.q;
    for (int j = 0; j < mdp.S; ++j) gv[j] += (1.0 - gamma) * q[j];
  }
}

double exact_mdp_gap(const MdpSaddleConfig& cfg, const MdpInstance& mdp, const Vec& v,
                     const Vec& mu) {
  check_mdp_pair(cfg, mdp, v, mu);
  int A = mdp.total_pairs();
  double mu_r = 0.0;
  double best_row = -std::numeric_limits<double>::infinity();
  Vec flow(mdp.S, 0.0);  // (gamma P - Ihat)^T mu
  double gamma = cfg.mode == MdpMode::Discounted ? *mdp.gamma : 1.0;
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    const double* row = mdp.transitions.row_ptr(r);
    double pv = 0.0;
    for (int j = 0; j < mdp.S; ++j) {
      pv += row[j] * v[j];
      flow[j] += gamma * row[j] * mu[r];
    }
    flow[i] -= mu[r];
    best_row = std::max(best_row, gamma * pv - v[i] + mdp.rewards[r]);
    mu_r += mu[r] * mdp.rewards[r];
  }
  double gap;
  if (cfg.mode == MdpMode::Mixing) {
    gap = best_row + cfg.box_radius * l1_norm(flow) - mu_r;
  } else {
    const Vec& q = *mdp.q;
    double qv = dot(q, v);
    for (int j = 0; j < mdp.S; ++j) flow[j] += (1.0 - gamma) * q[j];
    gap = (1.0 - gamma) * qv + best_row + cfg.box_radius * l1_norm(flow) - mu_r;
  }
  return gap;
}

Policy round_to_policy(const Vec& mu, const MdpInstance& mdp) {
  if (static_cast<int>(mu.size()) != mdp.total_pairs())
    throw std::invalid_argument("round_to_policy: dimension mismatch");
  Policy pi;
  pi.rows.resize(mdp.S);
  for (int i = 0; i < mdp.S; ++i) {
    int n = mdp.actions[i];
    pi.rows[i].assign(n, 0.0);
    double lambda = 0.0;
    for (int a = 0; a < n; ++a) lambda += mu[mdp.row(i, a)];
    if (lambda > 1e-12) {
      for (int a = 0; a < n; ++a) pi.rows[i][a] = mu[mdp.row(i, a)] / lambda;
    } else {
      for (int a = 0; a < n; ++a) pi.rows[i][a] = 1.0 / n;
    }
  }
  return pi;
}

MdpSolveResult solve_mdp(const MdpInstance& mdp, double eps, uint64_t seed,
                         const MdpSolveOptions& options) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("solve_mdp: eps must lie in (0,1)");
  MdpSolveResult result;
  MdpSaddleConfig& cfg = result.cfg;

  double eps_internal;
  if (mdp.discounted()) {
    if (!mdp.q) throw ConfigError("solve_mdp: discounted instance needs q");
    cfg.mode = MdpMode::Discounted;
    cfg.M = 1.0 / (1.0 - *mdp.gamma);
    eps_internal = (1.0 - *mdp.gamma) * eps / 3.0;
  } else {
    cfg.mode = MdpMode::Mixing;
    int tm = options.t_mix ? *options.t_mix : mixing_time(mdp);
    cfg.M = 2.0 * tm;
    eps_internal = eps / 3.0;
  }
  cfg.box_radius = 2.0 * cfg.M;
  cfg.eps = eps_internal;

  int A = mdp.total_pairs();
  double vx = 2.0;
  double vy = 9.0 * (cfg.M * cfg.M + 1.0) * A;
  cfg.schedule = schedule_for(eps_internal, mdp.S, cfg.box_radius, A, vx, vy, options.constants);
  cfg.schedule.checkpoint_count = options.checkpoint_count;
  if (options.max_iters > 0 && cfg.schedule.iters > options.max_iters)
    cfg.schedule.iters = options.max_iters;

  GenerativeModel gen(mdp);
  BoundedEstimator ev = cfg.mode == MdpMode::Mixing ? estimator_v_mixing(mdp, gen)
                                                    : estimator_v_discounted(mdp, gen);
  BoundedEstimator emu = cfg.mode == MdpMode::Mixing ? estimator_mu_mixing(mdp, gen, cfg.M)
                                                     : estimator_mu_discounted(mdp, gen, cfg.M);

  SaddleProblem prob;
  prob.primal_dim = mdp.S;
  prob.box_radius = cfg.box_radius;
  prob.dual_dim = A;
  prob.samples_per_iter = 2;
  const MdpInstance* m = &mdp;
  const MdpSaddleConfig* pc = &cfg;
  prob.gap = [m, pc](const Vec& v, const Vec&, const Vec& mu) {
    return exact_mdp_gap(*pc, *m, v, mu);
  };

  std::optional<OptimalSolution> oracle;
  if (options.with_oracle_subopt) {
    try {
      oracle = optimal_oracle(mdp);
    } catch (const OracleTooLarge&) {
      oracle.reset();
    }
  }
  if (oracle) {
    const OptimalSolution* opt = &*oracle;
    prob.subopt = [m, opt](const Vec&, const Vec&, const Vec& mu) -> std::optional<double> {
      Policy pi = round_to_policy(mu, *m);
      return opt->v_bar - evaluate_policy(*m, pi).v_bar;
    };
  }

  result.smd = run_smd(prob, ev, nullptr, emu, cfg.schedule, RngState(seed), options.mode);
  result.policy = round_to_policy(result.smd.avg_y, mdp);
  result.generative_samples = gen.samples_drawn();
  if (oracle) result.subopt = oracle->v_bar - evaluate_policy(mdp, result.policy).v_bar;
  return result;
}

}  // namespace mdpsmd
