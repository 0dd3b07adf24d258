#include <doctest.h>

#include <cmath>

#include "mdpsmd/errors.hpp"
#include "mdpsmd/game.hpp"
#include "mdpsmd/smd.hpp"

using namespace mdpsmd;

TEST_CASE("schedule_for reproduces the closed-form schedule") {
  SmdSchedule s = schedule_for(0.5, 1, 1.0, 2, 2.0, 2.0);
  CHECK(s.eta_x == doctest::Approx(1.0 / 16));
  CHECK(s.eta_y == doctest::Approx(1.0 / 16));
  CHECK(s.iters == 512);

  // T scales as eps^-2
  SmdSchedule s1 = schedule_for(0.4, 3, 2.0, 5, 1.5, 2.5);
  SmdSchedule s2 = schedule_for(0.2, 3, 2.0, 5, 1.5, 2.5);
  CHECK(s2.iters == doctest::Approx(4.0 * s1.iters).epsilon(0.01));

  SmdSchedule s3 = schedule_for(0.1, 2, 1.0, 4, 2.0, 9.0 * (4.0 + 1.0) * 4);
  CHECK(s3.eta_y == doctest::Approx(0.1 / 720));

  CHECK_THROWS_AS(schedule_for(1.5, 1, 1.0, 2, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(schedule_for(0.0, 1, 1.0, 2, 1.0, 1.0), ConfigError);
}

TEST_CASE("checkpoint_schedule is geometric, unique, ends at T") {
  auto pts = checkpoint_schedule(100000, 16);
  CHECK(pts.back() == 100000);
  for (size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);
  CHECK(pts.size() <= 17);

  auto tiny = checkpoint_schedule(3, 16);
  CHECK(tiny.back() == 3);
}

TEST_CASE("bilinear_gap closed form equals brute force over extreme points") {
  RngStream rng = RngState(8).stream(0);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 1 + rng.next_below(4);
    int n = 1 + rng.next_below(3);
    double radius = 0.5 + 2.0 * rng.next_double();
    Mat M(m, n);
    Vec b(n), c(m);
    for (double& v : M.a) v = 2.0 * rng.next_double() - 1.0;
    for (double& v : b) v = 2.0 * rng.next_double() - 1.0;
    for (double& v : c) v = 2.0 * rng.next_double() - 1.0;

    Vec x(n), y(m, 0.0);
    for (int j = 0; j < n; ++j) x[j] = radius * (2.0 * rng.next_double() - 1.0);
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      y[i] = 0.01 + rng.next_double();
      total += y[i];
    }
    for (int i = 0; i < m; ++i) y[i] /= total;

    auto f = [&](const Vec& xx, const Vec& yy) {
      double v = dot(b, xx) - dot(c, yy);
      Vec Mx = matvec(M, xx);
      v += dot(yy, Mx);
      return v;
    };

    // max over simplex vertices
    double best_dual = -1e300;
    for (int i = 0; i < m; ++i) {
      Vec e(m, 0.0);
      e[i] = 1.0;
      best_dual = std::max(best_dual, f(x, e));
    }
    // min over box corners
    double best_primal = 1e300;
    for (int mask = 0; mask < (1 << n); ++mask) {
      Vec corner(n);
      for (int j = 0; j < n; ++j) corner[j] = (mask >> j) & 1 ? radius : -radius;
      best_primal = std::min(best_primal, f(corner, y));
    }
    double brute = best_dual - best_primal;
    CHECK(bilinear_gap(M, b, c, radius, x, y) == doctest::Approx(brute).epsilon(1e-9));
  }
}

TEST_CASE("bilinear_gap of the null game is zero and inputs are validated") {
  Mat M(1, 1);
  CHECK(bilinear_gap(M, {0.0}, {0.0}, 0.0, {0.0}, {1.0}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(bilinear_gap(M, {0.0}, {0.0}, 1.0, {2.0}, {1.0}), std::domain_error);
  CHECK_THROWS_AS(bilinear_gap(M, {0.0}, {0.0}, 1.0, {0.0}, {0.5}), std::domain_error);
}

namespace {

// 2x2 matching-pennies style test game M = [[0,1],[1,0]], b = c = 0.
GameInstance diag_game() {
  Mat M(2, 2);
  M(0, 1) = 1.0;
  M(1, 0) = 1.0;
  return GameInstance(std::move(M), Vec(2, 0.0), Vec(2, 0.0), 1.0);
}

}  // namespace

TEST_CASE("run_smd on a singleton problem returns the only point") {
  SaddleProblem prob;
  prob.primal_dim = 1;
  prob.box_radius = 0.0;
  prob.dual_dim = 1;
  BoundedEstimator ex{{1.0, 1.0, NormKind::Euclidean},
                      [](const SmdView&, RngStream&) { return SparseGradient{}; }};
  BoundedEstimator ey{{1.0, 1.0, NormKind::LocalSimplex},
                      [](const SmdView&, RngStream&) { return SparseGradient{}; }};
  SmdSchedule sched;
  sched.eta_x = sched.eta_y = 0.01;
  sched.iters = 100;
  SmdResult r = run_smd(prob, ex, nullptr, ey, sched, RngState(0), AverageMode::Dense);
  CHECK(r.avg_x[0] == 0.0);
  CHECK(r.avg_y[0] == doctest::Approx(1.0));
}

TEST_CASE("run_smd solves the 2x2 game: gap <= 0.1 in at least 80 of 100 seeds") {
  GameInstance game = diag_game();
  int hits = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    GameSolveResult res = solve_game(game, 0.1, seed);
    if (res.gap <= 0.1) ++hits;
  }
  CHECK(hits >= 80);
}

TEST_CASE("dense and lazy averaging agree on full runs with equal seeds") {
  GameInstance g1 = diag_game();
  GameSolveResult dense = solve_game(g1, 0.25, 7, AverageMode::Dense);
  GameInstance g2 = diag_game();
  GameSolveResult lazy = solve_game(g2, 0.25, 7, AverageMode::Lazy);
  CHECK(dense.smd.samples == lazy.smd.samples);
  CHECK(linf_diff(dense.smd.avg_x, lazy.smd.avg_x) < 1e-9);
  CHECK(linf_diff(dense.smd.avg_y, lazy.smd.avg_y) < 1e-9);
}

TEST_CASE("per-run regret bound of the l2 mirror descent lemma holds numerically") {
  GameInstance game = diag_game();
  BoundedEstimator ex = estimator_x_game(game);
  BoundedEstimator ey = estimator_y_game(game);
  SmdSchedule sched = schedule_for(0.3, 2, 1.0, 2, ex.bounds.second_moment,
                                   ey.bounds.second_moment);
  sched.iters = std::min<long long>(sched.iters, 5000);

  SaddleProblem prob;
  prob.primal_dim = 2;
  prob.box_radius = 1.0;
  prob.dual_dim = 2;
  SmdOptions opt;
  opt.record_trajectory = true;
  SmdResult r = run_smd(prob, ex, nullptr, ey, sched, RngState(13), AverageMode::Dense, opt);
  REQUIRE(r.trajectory.size() == static_cast<size_t>(sched.iters));

  RngStream rng = RngState(77).stream(0);
  for (int probe = 0; probe < 8; ++probe) {
    Vec comp(2);
    if (probe == 0) {
      comp = r.avg_x;
    } else {
      for (double& v : comp) v = 2.0 * rng.next_double() - 1.0;
    }
    double lhs = 0.0, quad = 0.0;
    const Vec& x1 = r.trajectory.front().x;
    for (const auto& step : r.trajectory) {
      double g2 = 0.0;
      for (int t = 0; t < step.gx.n; ++t) {
        lhs += sched.eta_x * step.gx.val[t] * (step.x[step.gx.idx[t]] - comp[step.gx.idx[t]]);
        g2 += step.gx.val[t] * step.gx.val[t];
      }
      quad += 0.5 * sched.eta_x * sched.eta_x * g2;
    }
    double v1 = 0.0;
    for (size_t i = 0; i < comp.size(); ++i) v1 += 0.5 * (x1[i] - comp[i]) * (x1[i] - comp[i]);
    CHECK(lhs <= v1 + quad + 1e-9);
  }
}

TEST_CASE("box and simplex iterates stay feasible throughout a run") {
  GameInstance game = diag_game();
  BoundedEstimator ex = estimator_x_game(game);
  BoundedEstimator ey = estimator_y_game(game);

  // wrap the x estimator to observe the iterates every draw
  BoundedEstimator probe = ex;
  auto inner = ex.draw;
  probe.draw = [inner](const SmdView& view, RngStream& rng) {
    CHECK(std::abs(view.xv(0)) <= 1.0 + 1e-12);
    CHECK(std::abs(view.xv(1)) <= 1.0 + 1e-12);
    CHECK(view.dual_total() > 0.0);
    return inner(view, rng);
  };
  SmdSchedule sched = schedule_for(0.5, 2, 1.0, 2, ex.bounds.second_moment,
                                   ey.bounds.second_moment);
  sched.iters = std::min<long long>(sched.iters, 2000);
  SaddleProblem prob;
  prob.primal_dim = 2;
  prob.box_radius = 1.0;
  prob.dual_dim = 2;
  run_smd(prob, probe, nullptr, ey, sched, RngState(3), AverageMode::Lazy);
}

TEST_CASE("run_smd throws StepBoundViolation on oversized dual steps") {
  SaddleProblem prob;
  prob.primal_dim = 1;
  prob.box_radius = 1.0;
  prob.dual_dim = 2;
  BoundedEstimator ex{{1.0, 1.0, NormKind::Euclidean},
                      [](const SmdView&, RngStream&) { return SparseGradient{}; }};
  BoundedEstimator ey{{100.0, 100.0, NormKind::LocalSimplex},
                      [](const SmdView&, RngStream&) {
                        SparseGradient g;
                        g.add(0, 100.0);
                        return g;
                      }};
  SmdSchedule sched;
  sched.eta_x = 0.01;
  sched.eta_y = 0.01;  // 0.01 * 100 = 1 > 1/2
  sched.iters = 10;
  CHECK_THROWS_AS(run_smd(prob, ex, nullptr, ey, sched, RngState(0), AverageMode::Dense),
                  StepBoundViolation);
}

TEST_CASE("median averaged gap is nonincreasing across late checkpoints") {
  GameInstance game = diag_game();
  std::vector<double> final_gap, quarter_gap;
  for (uint64_t seed = 0; seed < 30; ++seed) {
    GameSolveResult res = solve_game(game, 0.15, seed);
    const auto& cps = res.smd.checkpoints;
    REQUIRE(cps.size() >= 3);
    long long target = cps.back().t / 4;
    const Checkpoint* quarter = &cps.front();
    for (const auto& cp : cps)
      if (cp.t <= target) quarter = &cp;
    final_gap.push_back(cps.back().gap);
    quarter_gap.push_back(quarter->gap);
  }
  std::sort(final_gap.begin(), final_gap.end());
  std::sort(quarter_gap.begin(), quarter_gap.end());
  CHECK(final_gap[15] <= quarter_gap[15] + 1e-12);
}
