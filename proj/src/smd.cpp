#include "mdpsmd/smd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

SmdSchedule schedule_for(double eps, int n, double b, int m, double vx, double vy,
                         SmdConstants k) {
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("schedule_for: eps must lie in (0,1)");
  if (!(vx > 0.0) || !(vy > 0.0) || !(b >= 0.0) || n <= 0 || m <= 0)
    throw ConfigError("schedule_for: bounds must be positive");
  SmdSchedule s;
  s.eps = eps;
  s.eta_x = eps / (k.eta_divisor * vx);
  s.eta_y = eps / (k.eta_divisor * vy);
  double t_box = k.box_iters * n * b * b / (eps * s.eta_x);
  double t_simplex = k.simplex_iters * std::log(static_cast<double>(m)) / (eps * s.eta_y);
  s.iters = static_cast<long long>(std::ceil(std::max(t_box, t_simplex)));
  if (s.iters < 1) s.iters = 1;
  return s;
}

std::vector<long long> checkpoint_schedule(long long T, int count) {
  std::vector<long long> pts;
  if (T <= 0) return pts;
  for (int k = 1; k <= count; ++k) {
    double t = std::pow(static_cast<double>(T), static_cast<double>(k) / count);
    long long tt = std::llround(t);
    tt = std::max<long long>(1, std::min(tt, T));
    if (pts.empty() || tt > pts.back()) pts.push_back(tt);
  }
  if (pts.empty() || pts.back() != T) pts.push_back(T);
  return pts;
}

namespace {

// Merge duplicate indices so each coordinate is stepped once per iteration.
int merge_terms(const SparseGradient& g, int* idx, double* val) {
  int n = 0;
  for (int t = 0; t < g.n; ++t) {
    bool found = false;
    for (int u = 0; u < n; ++u) {
      if (idx[u] == g.idx[t]) {
        val[u] += g.val[t];
        found = true;
        break;
      }
    }
    if (!found) {
      idx[n] = g.idx[t];
      val[n] = g.val[t];
      ++n;
    }
  }
  return n;
}

struct LazyBoxAverage {
  Vec sum;          // accumulated contributions
  std::vector<long long> upto;  // steps already folded into sum

  void init(int n) {
    sum.assign(n, 0.0);
    upto.assign(n, 0);
  }
  // Call before coordinate i changes at step t (value still pre-step).
  void touch(int i, double value, long long t) {
    sum[i] += value * static_cast<double>(t - 1 - upto[i]);
    upto[i] = t - 1;
  }
  Vec snapshot(const Vec& x, long long t) const {
    Vec out(sum.size());
    for (size_t i = 0; i < sum.size(); ++i)
      out[i] = (sum[i] + x[i] * static_cast<double>(t - upto[i])) / static_cast<double>(t);
    return out;
  }
};

struct LazyDualAverage {
  std::vector<KahanSum> sum;
  Vec h_mark;  // value of H at last flush, per coordinate
  KahanSum H;  // running sum of 1/S_tau over recorded steps

  void init(int m) {
    sum.assign(m, KahanSum{});
    h_mark.assign(m, 0.0);
  }
  void touch(int k, double weight) {
    sum[k].add(weight * (H.value() - h_mark[k]));
    h_mark[k] = H.value();
  }
  void record_step(double total) { H.add(1.0 / total); }
  Vec snapshot(const SumTree& tree, long long t) const {
    Vec out(sum.size());
    for (size_t k = 0; k < sum.size(); ++k)
      out[k] = (sum[k].value() + tree.weight(static_cast<int>(k)) * (H.value() - h_mark[k])) /
               static_cast<double>(t);
    return out;
  }
};

}  // namespace

SmdResult run_smd(const SaddleProblem& problem, const BoundedEstimator& est_x,
                  const BoundedEstimator* est_s, const BoundedEstimator& est_y,
                  const SmdSchedule& schedule, const RngState& rng, AverageMode mode,
                  const SmdOptions& options) {
  const int n = problem.primal_dim;
  const int K = problem.capped_dim;
  const int m = problem.dual_dim;
  const long long T = schedule.iters;
  if (n <= 0 || m <= 0 || T <= 0) throw ConfigError("run_smd: empty problem or schedule");
  if (K > 0 && !est_s) throw ConfigError("run_smd: capped block present but no estimator");
  if (K > 64) throw ConfigError("run_smd: capped block too large");
  if (options.record_trajectory && T > 20000)
    throw ConfigError("run_smd: trajectory recording is desk-scale only");

  // Advisory check of the simplex-side max-entry requirement c <= 2v/eps.
  if (schedule.eps > 0.0 && est_y.bounds.max_entry > 2.0 * est_y.bounds.second_moment / schedule.eps + 1e-9)
    std::fprintf(stderr,
                 "run_smd: warning: dual estimator max-entry bound %.3g exceeds 2v/eps = %.3g\n",
                 est_y.bounds.max_entry, 2.0 * est_y.bounds.second_moment / schedule.eps);

  auto t_start = std::chrono::steady_clock::now();

  Vec x(n, 0.0);
  Vec s(K > 0 ? K : 0, K > 0 ? 1.0 / K : 0.0);
  SumTree dual(Vec(m, 1.0));

  RngStream rng_x = rng.stream(kStreamPrimal);
  RngStream rng_s = rng.stream(kStreamSlack);
  RngStream rng_y = rng.stream(kStreamDual);

  SmdView view{&x, &s, &dual};

  // Dense accumulators
  Vec dsum_x, dsum_s, dsum_y;
  // Lazy accumulators
  LazyBoxAverage lazy_x;
  LazyDualAverage lazy_y;
  Vec lsum_s;  // the s block is dense in both modes (every step touches all of it)

  const bool dense = mode == AverageMode::Dense;
  if (dense) {
    dsum_x.assign(n, 0.0);
    dsum_s.assign(K, 0.0);
    dsum_y.assign(m, 0.0);
  } else {
    lazy_x.init(n);
    lazy_y.init(m);
    lsum_s.assign(K, 0.0);
  }

  std::vector<long long> marks = checkpoint_schedule(T, schedule.checkpoint_count);
  size_t next_mark = 0;

  SmdResult result;

  Vec s_grad(K, 0.0);
  const double guard = 0.5 + 1e-12;
  const long long rebuild_period = 1ll << 20;
  long long steps_since_rebuild = 0;

  auto snapshot_avg = [&](long long t, Vec& ax, Vec& as, Vec& ay) {
    if (dense) {
      ax.resize(n);
      as.resize(K);
      ay.resize(m);
      for (int i = 0; i < n; ++i) ax[i] = dsum_x[i] / static_cast<double>(t);
      for (int k = 0; k < K; ++k) as[k] = dsum_s[k] / static_cast<double>(t);
      for (int k = 0; k < m; ++k) ay[k] = dsum_y[k] / static_cast<double>(t);
    } else {
      ax = lazy_x.snapshot(x, t);
      as.resize(K);
      for (int k = 0; k < K; ++k) as[k] = lsum_s[k] / static_cast<double>(t);
      ay = lazy_y.snapshot(dual, t);
    }
  };

  for (long long t = 1; t <= T; ++t) {
    // All estimators observe the same pre-step iterate.
    SparseGradient gx = est_x.draw(view, rng_x);
    SparseGradient gs;
    if (K > 0) gs = est_s->draw(view, rng_s);
    SparseGradient gy = est_y.draw(view, rng_y);

    if (options.record_trajectory) result.trajectory.push_back({x, gx});

    // Box block: projected subgradient step on touched coordinates.
    {
      int idx[3];
      double val[3];
      int cnt = merge_terms(gx, idx, val);
      for (int u = 0; u < cnt; ++u) {
        int i = idx[u];
        if (!dense) lazy_x.touch(i, x[i], t);
        x[i] = std::clamp(x[i] - schedule.eta_x * val[u], -problem.box_radius, problem.box_radius);
      }
    }

    // Capped block: multiplicative step with cap rescale, dense over K.
    if (K > 0) {
      std::fill(s_grad.begin(), s_grad.end(), gs.shift);
      for (int u = 0; u < gs.n; ++u) s_grad[gs.idx[u]] += gs.val[u];
      double total = 0.0;
      for (int k = 0; k < K; ++k) {
        double step = schedule.eta_s * s_grad[k];
        if (std::abs(step) > guard)
          throw StepBoundViolation("run_smd: capped-block step exceeded 1/2");
        s[k] *= std::exp(-step);
        total += s[k];
      }
      if (total > problem.cap) {
        double scale = problem.cap / total;
        for (int k = 0; k < K; ++k) s[k] *= scale;
      }
    }

    // Dual simplex block: multiplicative weights, one tree update per term.
    {
      if (gy.shift != 0.0) throw ConfigError("run_smd: dual estimator emitted a dense shift");
      int idx[3];
      double val[3];
      int cnt = merge_terms(gy, idx, val);
      for (int u = 0; u < cnt; ++u) {
        double step = schedule.eta_y * val[u];
        if (std::abs(step) > guard)
          throw StepBoundViolation("run_smd: dual step |eta_y * g| exceeded 1/2");
        int k = idx[u];
        if (!dense) lazy_y.touch(k, dual.weight(k));
        double w = std::max(dual.weight(k) * std::exp(-step), 1e-300);
        dual.update(k, w);
      }
    }

    // Record iterate t.
    double S = dual.total();
    if (dense) {
      for (int i = 0; i < n; ++i) dsum_x[i] += x[i];
      for (int k = 0; k < K; ++k) dsum_s[k] += s[k];
      for (int k = 0; k < m; ++k) dsum_y[k] += dual.weight(k) / S;
    } else {
      for (int k = 0; k < K; ++k) lsum_s[k] += s[k];
      lazy_y.record_step(S);
    }

    // Keep the dual weights in floating-point range; both modes renormalize
    // at the same steps so their weight sequences match exactly.
    ++steps_since_rebuild;
    if (S > 1e60 || S < 1e-60 || steps_since_rebuild >= rebuild_period) {
      if (!dense)
        for (int k = 0; k < m; ++k) lazy_y.touch(k, dual.weight(k));
      for (int k = 0; k < m; ++k) dual.update(k, std::max(dual.weight(k) / S, 1e-300));
      dual.rebuild();
      steps_since_rebuild = 0;
    }

    if (next_mark < marks.size() && t == marks[next_mark]) {
      Vec ax, as, ay;
      snapshot_avg(t, ax, as, ay);
      if (!all_finite(ax) || !all_finite(as) || !all_finite(ay))
        throw NonFiniteIterate("run_smd: non-finite averaged iterate at checkpoint");
      Checkpoint cp;
      cp.t = t;
      cp.samples = static_cast<long long>(problem.samples_per_iter) * t;
      cp.gap = problem.gap ? problem.gap(ax, as, ay) : 0.0;
      if (problem.subopt) cp.subopt = problem.subopt(ax, as, ay);
      result.checkpoints.push_back(cp);
      ++next_mark;
    }
  }

  snapshot_avg(T, result.avg_x, result.avg_s, result.avg_y);
  result.iters = T;
  result.samples = static_cast<long long>(problem.samples_per_iter) * T;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                             t_start)
                       .count();
  return result;
}

double bilinear_gap(const Mat& M, const Vec& b, const Vec& c, double radius, const Vec& x,
                    const Vec& y) {
  const int m = M.rows;
  const int n = M.cols;
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != m)
    throw std::invalid_argument("bilinear_gap: shape mismatch");
  if (linf_norm(x) > radius + 1e-9) throw std::domain_error("bilinear_gap: x outside box");
  double ysum = 0.0;
  for (double v : y) {
    if (v < -1e-9) throw std::domain_error("bilinear_gap: y has negative entries");
    ysum += v;
  }
  if (std::abs(ysum - 1.0) > 1e-9) throw std::domain_error("bilinear_gap: y not on simplex");

  Vec Mx = matvec(M, x);
  double best_dual = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) best_dual = std::max(best_dual, Mx[i] - c[i]);

  Vec gx = matvec_t(M, y);
  for (int j = 0; j < n; ++j) gx[j] += b[j];

  return best_dual + dot(b, x) + radius * l1_norm(gx) + dot(c, y);
}

}  // namespace mdpsmd
