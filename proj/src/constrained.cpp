#include "mdpsmd/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdpsmd/errors.hpp"
#include "mdpsmd/mdp_saddle.hpp"

namespace mdpsmd {

BoundedEstimator estimator_v_constrained(const MdpInstance& mdp, const GenerativeModel& gen) {
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
      out.add(i, 1.0);
      out.add(j, -1.0);
    }
    return out;
  };
  return est;
}

BoundedEstimator estimator_s(const MdpInstance& mdp) {
  if (!mdp.D) throw ConfigError("estimator_s: instance has no constraint matrix");
  const Mat* D = &*mdp.D;
  int K = D->cols;
  double d_max = 0.0;
  for (double d : D->a) d_max = std::max(d_max, std::abs(d));
  BoundedEstimator est;
  est.bounds = {K * d_max + 2.0, 2.0 * K * d_max * d_max + 2.0, NormKind::LocalCapped};
  est.draw = [D, K](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = view.sample_dual(rng);
    int k = rng.next_below(K);
    out.add(k, K * (*D)(row, k));
    out.shift = -1.0;
    return out;
  };
  return est;
}

BoundedEstimator estimator_mu_constrained(const MdpInstance& mdp, const GenerativeModel& gen,
                                          double M) {
  if (!mdp.D) throw ConfigError("estimator_mu_constrained: instance has no constraint matrix");
  const Mat* D = &*mdp.D;
  int K = D->cols;
  double d_max = 0.0;
  for (double d : D->a) d_max = std::max(d_max, std::abs(d));
  int A = mdp.total_pairs();
  double c = (2.0 * M + 1.0 + 2.0 * d_max) * A;
  BoundedEstimator est;
  est.bounds = {c, 2.0 * (2.0 * M + 1.0 + 2.0 * d_max) * (2.0 * M + 1.0 + 2.0 * d_max) * A,
                NormKind::LocalSimplex};
  const MdpInstance* m = &mdp;
  const GenerativeModel* g = &gen;
  est.draw = [m, g, D, K, A](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int row = rng.next_below(A);
    int i = m->row_state[row];
    int j = g->sample(row, rng);
    double val = view.xv(i) - view.xv(j);
    double s_total = view.s_l1();
    if (s_total > 0.0) {
      // k ~ s_k / ||s||_1 by cumulative walk; K stays desk-scale
      double u = rng.next_double() * s_total;
      int k = K - 1;
      for (int kk = 0; kk < K; ++kk) {
        if (u < view.sv(kk)) {
          k = kk;
          break;
        }
        u -= view.sv(kk);
      }
      val += (*D)(row, k) * s_total;
    }
    out.add(row, A * val);
    return out;
  };
  return est;
}

void constrained_exact_gradients(const MdpInstance& mdp, const Vec& v, const Vec& s,
                                 const Vec& mu, Vec& gv, Vec& gs, Vec& gmu) {
  const Mat& D = *mdp.D;
  int A = mdp.total_pairs();
  int K = D.cols;
  gv.assign(mdp.S, 0.0);
  gs.assign(K, -1.0);
  gmu.assign(A, 0.0);
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    const double* row = mdp.transitions.row_ptr(r);
    double pv = 0.0;
    for (int j = 0; j < mdp.S; ++j) {
      pv += row[j] * v[j];
      gv[j] -= row[j] * mu[r];
    }
    gv[i] += mu[r];
    double ds = 0.0;
    for (int k = 0; k < K; ++k) {
      ds += D(r, k) * s[k];
      gs[k] += D(r, k) * mu[r];
    }
    gmu[r] = v[i] - pv + ds;
  }
}

double exact_constrained_gap(const ConstrainedConfig& cfg, const MdpInstance& mdp, const Vec& v,
                             const Vec& s, const Vec& mu) {
  if (!mdp.D) throw ConfigError("exact_constrained_gap: instance has no constraint matrix");
  const Mat& D = *mdp.D;
  int A = mdp.total_pairs();
  int K = D.cols;
  if (static_cast<int>(v.size()) != mdp.S || static_cast<int>(s.size()) != K ||
      static_cast<int>(mu.size()) != A)
    throw std::invalid_argument("exact_constrained_gap: dimension mismatch");
  if (linf_norm(v) > cfg.box_radius + 1e-9) throw std::domain_error("constrained gap: v outside box");
  double s_sum = 0.0;
  for (double x : s) {
    if (x < -1e-9) throw std::domain_error("constrained gap: s has negative entries");
    s_sum += x;
  }
  if (s_sum > 2.0 + 1e-9) throw std::domain_error("constrained gap: s exceeds the cap");
  double mu_sum = 0.0;
  for (double x : mu) {
    if (x < -1e-9) throw std::domain_error("constrained gap: mu has negative entries");
    mu_sum += x;
  }
  if (std::abs(mu_sum - 1.0) > 1e-9) throw std::domain_error("constrained gap: mu not on simplex");

  // max over mu' of mu'^T [(Ihat - P) v + D s] - 1^T s
  double best_row = -std::numeric_limits<double>::infinity();
  Vec flow(mdp.S, 0.0);  // (Ihat - P)^T mu
  Vec dmu(K, 0.0);       // D^T mu
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    const double* row = mdp.transitions.row_ptr(r);
    double pv = 0.0;
    for (int j = 0; j < mdp.S; ++j) {
      pv += row[j] * v[j];
      flow[j] -= row[j] * mu[r];
    }
    flow[i] += mu[r];
    double ds = 0.0;
    for (int k = 0; k < K; ++k) {
      ds += D(r, k) * s[k];
      dmu[k] += D(r, k) * mu[r];
    }
    best_row = std::max(best_row, v[i] - pv + ds);
  }
  double dual_max = best_row - s_sum;

  // min over (v', s') of v'^T (Ihat-P)^T mu + s'^T (D^T mu - 1)
  double worst_k = 0.0;
  for (int k = 0; k < K; ++k) worst_k = std::min(worst_k, dmu[k] - 1.0);
  double primal_min = -cfg.box_radius * l1_norm(flow) + 2.0 * worst_k;

  return dual_max - primal_min;
}

Mat rescale_constraints(const Mat& D, const Vec& c) {
  if (static_cast<int>(c.size()) != D.cols)
    throw std::invalid_argument("rescale_constraints: c dimension mismatch");
  Mat out = D;
  for (int k = 0; k < D.cols; ++k) {
    if (!(c[k] > 0.0)) throw ConfigError("rescale_constraints: c must be positive");
    for (int r = 0; r < D.rows; ++r) out(r, k) /= c[k];
  }
  return out;
}

ConstrainedSolveResult solve_constrained(const MdpInstance& mdp, double eps, uint64_t seed,
                                         const ConstrainedSolveOptions& options) {
  if (!mdp.D) throw ConfigError("solve_constrained: instance has no constraint matrix");
  if (mdp.discounted()) throw ConfigError("solve_constrained: only average-reward instances");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("solve_constrained: eps must lie in (0,1)");

  ConstrainedSolveResult result;
  ConstrainedConfig& cfg = result.cfg;
  const Mat& D = *mdp.D;
  cfg.K = D.cols;
  for (double d : D.a) cfg.d_max = std::max(cfg.d_max, std::abs(d));
  int tm = options.t_mix ? *options.t_mix : mixing_time(mdp);
  cfg.M = 2.0 * cfg.d_max * tm;
  cfg.box_radius = 2.0 * cfg.M;
  double ei = options.internal_eps_factor * eps;
  cfg.eps = ei;

  int A = mdp.total_pairs();
  GenerativeModel gen(mdp);
  BoundedEstimator ev = estimator_v_constrained(mdp, gen);
  BoundedEstimator es = estimator_s(mdp);
  BoundedEstimator emu = estimator_mu_constrained(mdp, gen, cfg.M);

  // The mu block ascends the objective; the loop takes descent steps, so the
  // registered estimator is the negation of the public one.
  BoundedEstimator emu_loop = emu;
  auto raw_draw = emu.draw;
  emu_loop.draw = [raw_draw](const SmdView& view, RngStream& rng) {
    SparseGradient g = raw_draw(view, rng);
    for (int t = 0; t < g.n; ++t) g.val[t] = -g.val[t];
    g.shift = -g.shift;
    return g;
  };

  SmdConstants kc = options.constants;
  SmdSchedule sched;
  sched.eps = ei;
  sched.eta_x = ei / (kc.eta_divisor * ev.bounds.second_moment);
  sched.eta_s = ei / (kc.eta_divisor * es.bounds.second_moment);
  sched.eta_y = ei / (kc.eta_divisor * emu.bounds.second_moment);
  double r_capped = 2.0 * std::log(2.0 * std::max(cfg.K, 2)) + 1.0;
  double t_box = kc.box_iters * mdp.S * cfg.box_radius * cfg.box_radius / (ei * sched.eta_x);
  double t_capped = kc.simplex_iters * r_capped / (ei * sched.eta_s);
  double t_simplex = kc.simplex_iters * std::log(static_cast<double>(A)) / (ei * sched.eta_y);
  sched.iters = static_cast<long long>(std::ceil(std::max({t_box, t_capped, t_simplex})));
  if (sched.iters < 1) sched.iters = 1;
  sched.checkpoint_count = options.checkpoint_count;
  if (options.max_iters > 0 && sched.iters > options.max_iters) sched.iters = options.max_iters;
  cfg.schedule = sched;

  SaddleProblem prob;
  prob.primal_dim = mdp.S;
  prob.box_radius = cfg.box_radius;
  prob.capped_dim = cfg.K;
  prob.cap = 2.0;
  prob.dual_dim = A;
  prob.samples_per_iter = 2;  // generative draws per iteration
  const MdpInstance* m = &mdp;
  const ConstrainedConfig* pc = &cfg;
  prob.gap = [m, pc](const Vec& v, const Vec& s, const Vec& mu) {
    return exact_constrained_gap(*pc, *m, v, s, mu);
  };
  prob.subopt = [m](const Vec&, const Vec&, const Vec& mu) -> std::optional<double> {
    // feasibility margin of the stationary-corrected rounding, reported in
    // place of a suboptimality (the constrained objective is feasibility)
    Policy pi = round_to_policy(mu, *m);
    auto [P, r] = induced_chain(*m, pi);
    Vec nu = stationary_distribution(P);
    const Mat& D = *m->D;
    Vec dmu(D.cols, 0.0);
    for (int rr = 0; rr < m->total_pairs(); ++rr) {
      int i = m->row_state[rr];
      int a = rr - m->row_offset[i];
      double w = nu[i] * pi.rows[i][a];
      for (int k = 0; k < D.cols; ++k) dmu[k] += D(rr, k) * w;
    }
    double worst = dmu.empty() ? 0.0 : dmu[0];
    for (double x : dmu) worst = std::min(worst, x);
    return 1.0 - worst;  // <= eps means the policy is eps-feasible
  };

  result.smd = run_smd(prob, ev, &es, emu_loop, sched, RngState(seed), options.mode);
  result.policy = round_to_policy(result.smd.avg_y, mdp);

  // Metrics with mu rebuilt from the exact stationary distribution of pi.
  auto [P, rpi] = induced_chain(mdp, result.policy);
  Vec nu = stationary_distribution(P);
  Vec mu_stat(A, 0.0);
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    int a = r - mdp.row_offset[i];
    mu_stat[r] = nu[i] * result.policy.rows[i][a];
  }
  Vec flow(mdp.S, 0.0);
  Vec dmu(cfg.K, 0.0);
  for (int r = 0; r < A; ++r) {
    int i = mdp.row_state[r];
    const double* row = mdp.transitions.row_ptr(r);
    for (int j = 0; j < mdp.S; ++j) flow[j] -= row[j] * mu_stat[r];
    flow[i] += mu_stat[r];
    for (int k = 0; k < cfg.K; ++k) dmu[k] += D(r, k) * mu_stat[r];
  }
  result.stationarity_l1 = l1_norm(flow);
  result.min_dmu = dmu.empty() ? 0.0 : *std::min_element(dmu.begin(), dmu.end());
  return result;
}

}  // namespace mdpsmd
