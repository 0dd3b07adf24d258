#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "mdpsmd/linalg.hpp"
#include "mdpsmd/smd.hpp"

namespace mdpsmd {

// Bilinear box-simplex game min_x max_y y^T M x + b^T x - c^T y with
// precomputed l1 samplers over the inputs.
struct GameInstance {
  Mat M;  // m x n
  Vec b;  // n
  Vec c;  // m
  double radius = 1.0;

  // derived
  Vec row_l1;        // per-row l1 norms of M
  double m_inf = 0;  // max row l1
  double m_abs_sum = 0;
  double b_l1 = 0;
  double c_l1 = 0;
  double c_inf = 0;

  std::vector<AliasTable> row_alias;       // j | i over |M(i,:)|
  std::unique_ptr<AliasTable> cell_alias;  // (i,j) over all |M_ij|
  std::unique_ptr<AliasTable> b_alias;
  std::unique_ptr<AliasTable> c_alias;

  GameInstance(Mat M_, Vec b_, Vec c_, double radius_);
  GameInstance(const GameInstance&) = delete;
  GameInstance(GameInstance&&) = default;

  int rows() const { return M.rows; }
  int cols() const { return M.cols; }

  static GameInstance load(const std::string& path);
  void save(const std::string& path) const;
};

// Sample i ~ y_i, j ~ |M_ij| within the row, j' ~ |b|; emits sign(M_ij) times
// the row l1 norm plus the b term. Unbiased for M^T y + b.
BoundedEstimator estimator_x_game(const GameInstance& game);

// Sample (i,j) ~ |M_ij| globally, i' ~ |c|. Unbiased for -M x + c.
BoundedEstimator estimator_y_game(const GameInstance& game,
                                  bool global_cell_weights = true);

double exact_game_gap(const GameInstance& game, const Vec& x, const Vec& y);

struct GameSolveResult {
  SmdResult smd;
  double gap = 0.0;  // exact gap of the averaged pair
};

GameSolveResult solve_game(const GameInstance& game, double eps, uint64_t seed,
                           AverageMode mode = AverageMode::Lazy, SmdConstants constants = {},
                           long long max_iters = 0);

struct RegressionResult {
  Vec x;
  double certified_gap = 0.0;
  SmdResult smd;
};

// min_{|x|_inf <= 1} ||M x - c||_inf via the stacked game [M; -M], [c; -c].
RegressionResult solve_linf_regression(const Mat& M, const Vec& c, double eps, uint64_t seed,
                                       AverageMode mode = AverageMode::Lazy);

}  // namespace mdpsmd
