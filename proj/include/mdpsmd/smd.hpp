#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdpsmd/linalg.hpp"
#include "mdpsmd/rng.hpp"
#include "mdpsmd/sampling.hpp"

namespace mdpsmd {

enum class NormKind { Euclidean, LocalSimplex, LocalCapped };

struct EstimatorBounds {
  double max_entry = 0.0;      // bound on |g|_inf, holds with probability 1
  double second_moment = 0.0;  // bound on E||g||^2 in the declared norm
  NormKind norm = NormKind::Euclidean;
};

// A stochastic gradient draw: at most three sparse terms plus an optional
// uniform shift over the whole block.
struct SparseGradient {
  int idx[3] = {0, 0, 0};
  double val[3] = {0.0, 0.0, 0.0};
  int n = 0;
  double shift = 0.0;

  void add(int i, double v) {
    idx[n] = i;
    val[n] = v;
    ++n;
  }
};

// Step sizes and iteration budget. `eps` is carried along for the advisory
// max-entry check; it does not feed the loop.
struct SmdSchedule {
  double eta_x = 0.0;
  double eta_y = 0.0;
  double eta_s = 0.0;
  long long iters = 0;
  int checkpoint_count = 16;
  double eps = 0.0;
};

// Leading constants of the step/iteration rule, exposed as configuration.
struct SmdConstants {
  double eta_divisor = 4.0;
  double box_iters = 16.0;
  double simplex_iters = 8.0;
};

// eta_x = eps/(4 vx), eta_y = eps/(4 vy),
// T = ceil(max(16 n b^2/(eps eta_x), 8 ln(m)/(eps eta_y))).
SmdSchedule schedule_for(double eps, int n, double b, int m, double vx, double vy,
                         SmdConstants k = {});

// Read access to the current iterates, handed to estimators each draw.
struct SmdView {
  const Vec* x = nullptr;
  const Vec* s = nullptr;
  const SumTree* dual = nullptr;

  double xv(int i) const { return (*x)[i]; }
  double sv(int k) const { return (*s)[k]; }
  double s_l1() const {
    double t = 0.0;
    for (double v : *s) t += v;
    return t;
  }
  int sample_dual(RngStream& rng) const { return dual->sample(rng); }
  double dual_weight(int k) const { return dual->weight(k); }
  double dual_total() const { return dual->total(); }
};

struct BoundedEstimator {
  EstimatorBounds bounds;
  std::function<SparseGradient(const SmdView&, RngStream&)> draw;
};

struct Checkpoint {
  long long t = 0;
  long long samples = 0;
  double gap = 0.0;
  std::optional<double> subopt;
};

// Abstract box (x) simplex (y) saddle point, optionally with a capped
// nonnegative block (s). Gap and suboptimality callbacks are used for
// certification at checkpoints when present.
struct SaddleProblem {
  int primal_dim = 0;
  double box_radius = 0.0;
  int capped_dim = 0;  // 0 = no s block
  double cap = 2.0;
  int dual_dim = 0;
  int samples_per_iter = 2;

  std::function<double(const Vec& x, const Vec& s, const Vec& y)> gap;
  std::function<std::optional<double>(const Vec& x, const Vec& s, const Vec& y)> subopt;
};

enum class AverageMode { Dense, Lazy };

struct TrajectoryStep {
  Vec x;              // iterate the gradient was drawn at
  SparseGradient gx;  // primal draw (no eta applied)
};

struct SmdOptions {
  bool record_trajectory = false;
};

struct SmdResult {
  Vec avg_x;
  Vec avg_s;
  Vec avg_y;
  long long iters = 0;
  long long samples = 0;
  double wall_ms = 0.0;
  std::vector<Checkpoint> checkpoints;
  std::vector<TrajectoryStep> trajectory;
};

SmdResult run_smd(const SaddleProblem& problem, const BoundedEstimator& est_x,
                  const BoundedEstimator* est_s, const BoundedEstimator& est_y,
                  const SmdSchedule& schedule, const RngState& rng, AverageMode mode,
                  const SmdOptions& options = {});

// Exact duality gap of the bilinear box-simplex game
//   min_{|x|_inf <= radius} max_{y in simplex} y^T M x + b^T x - c^T y
// evaluated in closed form; always >= 0 up to roundoff.
double bilinear_gap(const Mat& M, const Vec& b, const Vec& c, double radius, const Vec& x,
                    const Vec& y);

// Geometrically spaced checkpoint iterations ending at T.
std::vector<long long> checkpoint_schedule(long long T, int count);

}  // namespace mdpsmd
