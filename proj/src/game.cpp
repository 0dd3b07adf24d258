#include "mdpsmd/game.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

using nlohmann::json;

GameInstance::GameInstance(Mat M_, Vec b_, Vec c_, double radius_)
    : M(std::move(M_)), b(std::move(b_)), c(std::move(c_)), radius(radius_) {
  if (static_cast<int>(b.size()) != M.cols || static_cast<int>(c.size()) != M.rows)
    throw ConfigError("game: b/c dimension mismatch");
  if (!all_finite(M.a) || !all_finite(b) || !all_finite(c) || !(radius >= 0.0))
    throw ConfigError("game: non-finite inputs");

  row_l1.assign(M.rows, 0.0);
  for (int i = 0; i < M.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < M.cols; ++j) s += std::abs(M(i, j));
    row_l1[i] = s;
    m_inf = std::max(m_inf, s);
    m_abs_sum += s;
  }
  b_l1 = l1_norm(b);
  c_l1 = l1_norm(c);
  c_inf = linf_norm(c);

  row_alias.reserve(M.rows);
  for (int i = 0; i < M.rows; ++i) {
    if (row_l1[i] > 0.0) {
      Vec w(M.cols);
      for (int j = 0; j < M.cols; ++j) w[j] = std::abs(M(i, j));
      row_alias.emplace_back(w);
    } else {
      row_alias.emplace_back();
    }
  }
  if (m_abs_sum > 0.0) {
    Vec cells(M.a.size());
    for (size_t k = 0; k < M.a.size(); ++k) cells[k] = std::abs(M.a[k]);
    cell_alias = std::make_unique<AliasTable>(cells);
  }
  if (b_l1 > 0.0) {
    Vec w(b.size());
    for (size_t j = 0; j < b.size(); ++j) w[j] = std::abs(b[j]);
    b_alias = std::make_unique<AliasTable>(w);
  }
  if (c_l1 > 0.0) {
    Vec w(c.size());
    for (size_t i = 0; i < c.size(); ++i) w[i] = std::abs(c[i]);
    c_alias = std::make_unique<AliasTable>(w);
  }
}

GameInstance GameInstance::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("game load: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str());
  int m = j.at("m").get<int>();
  int n = j.at("n").get<int>();
  Vec entries = j.at("entries").get<Vec>();
  if (static_cast<int>(entries.size()) != m * n) throw ConfigError("game load: entries size mismatch");
  Mat M(m, n);
  M.a = entries;
  Vec b = j.value("b", Vec(n, 0.0));
  Vec c = j.value("c", Vec(m, 0.0));
  double radius = j.value("radius", 1.0);
  return GameInstance(std::move(M), std::move(b), std::move(c), radius);
}

void GameInstance::save(const std::string& path) const {
  json j;
  j["m"] = M.rows;
  j["n"] = M.cols;
  j["entries"] = M.a;
  j["b"] = b;
  j["c"] = c;
  j["radius"] = radius;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("game save: cannot open " + path);
  out << j.dump(2) << "\n";
}

BoundedEstimator estimator_x_game(const GameInstance& game) {
  BoundedEstimator est;
  est.bounds.norm = NormKind::Euclidean;
  est.bounds.second_moment = 2.0 * (game.b_l1 * game.b_l1 + game.m_inf * game.m_inf);
  est.bounds.max_entry = game.m_inf + game.b_l1;
  const GameInstance* g = &game;
  est.draw = [g](const SmdView& view, RngStream& rng) {
    SparseGradient out;
    int i = view.sample_dual(rng);
    if (g->row_l1[i] > 0.0) {
      int j = g->row_alias[i].sample(rng);
      double sign = g->M(i, j) >= 0.0 ? 1.0 : -1.0;
      out.add(j, sign * g->row_l1[i]);
    }
    if (g->b_alias) {
      int j = g->b_alias->sample(rng);
      double sign = g->b[j] >= 0.0 ? 1.0 : -1.0;
      out.add(j, sign * g->b_l1);
    }
    return out;
  };
  return est;
}

BoundedEstimator estimator_y_game(const GameInstance& game, bool global_cell_weights) {
  BoundedEstimator est;
  est.bounds.norm = NormKind::LocalSimplex;
  est.bounds.second_moment =
      2.0 * game.rows() * (game.c_inf * game.c_inf + game.radius * game.radius * game.m_inf * game.m_inf);
  est.bounds.max_entry = game.rows() * (game.radius * game.m_inf + game.c_inf);
  const GameInstance* g = &game;
  if (global_cell_weights) {
    est.draw = [g](const SmdView& view, RngStream& rng) {
      SparseGradient out;
      if (g->cell_alias) {
        int cell = g->cell_alias->sample(rng);
        int i = cell / g->M.cols;
        int j = cell % g->M.cols;
        double mij = g->M(i, j);
        double sign = mij >= 0.0 ? 1.0 : -1.0;
        out.add(i, -sign * view.xv(j) * g->m_abs_sum);
      }
      if (g->c_alias) {
        int i = g->c_alias->sample(rng);
        double sign = g->c[i] >= 0.0 ? 1.0 : -1.0;
        out.add(i, sign * g->c_l1);
      }
      return out;
    };
  } else {
    // row picked uniformly, cell within the row; kept for A/B comparison
    est.draw = [g](const SmdView& view, RngStream& rng) {
      SparseGradient out;
      int i = rng.next_below(g->rows());
      if (g->row_l1[i] > 0.0) {
        int j = g->row_alias[i].sample(rng);
        double mij = g->M(i, j);
        double sign = mij >= 0.0 ? 1.0 : -1.0;
        out.add(i, -sign * view.xv(j) * g->rows() * g->row_l1[i]);
      }
      if (g->c_alias) {
        int i2 = g->c_alias->sample(rng);
        double sign = g->c[i2] >= 0.0 ? 1.0 : -1.0;
        out.add(i2, sign * g->c_l1);
      }
      return out;
    };
  }
  return est;
}

double exact_game_gap(const GameInstance& game, const Vec& x, const Vec& y) {
  return bilinear_gap(game.M, game.b, game.c, game.radius, x, y);
}

GameSolveResult solve_game(const GameInstance& game, double eps, uint64_t seed, AverageMode mode,
                           SmdConstants constants, long long max_iters) {
  if (game.radius * game.m_inf + game.c_inf < 0.5)
    std::fprintf(stderr, "solve_game: warning: b||M||_inf + ||c||_inf below Omega(1) scale\n");

  BoundedEstimator ex = estimator_x_game(game);
  BoundedEstimator ey = estimator_y_game(game);
  SmdSchedule sched = schedule_for(eps, game.cols(), game.radius, game.rows(),
                                   ex.bounds.second_moment, ey.bounds.second_moment, constants);
  if (max_iters > 0 && sched.iters > max_iters) sched.iters = max_iters;

  SaddleProblem prob;
  prob.primal_dim = game.cols();
  prob.box_radius = game.radius;
  prob.dual_dim = game.rows();
  prob.samples_per_iter = 2;
  const GameInstance* g = &game;
  prob.gap = [g](const Vec& x, const Vec&, const Vec& y) { return exact_game_gap(*g, x, y); };

  GameSolveResult res;
  res.smd = run_smd(prob, ex, nullptr, ey, sched, RngState(seed), mode);
  res.gap = exact_game_gap(game, res.smd.avg_x, res.smd.avg_y);
  return res;
}

RegressionResult solve_linf_regression(const Mat& M, const Vec& c, double eps, uint64_t seed,
                                       AverageMode mode) {
  Mat stacked(2 * M.rows, M.cols);
  for (int i = 0; i < M.rows; ++i)
    for (int j = 0; j < M.cols; ++j) {
      stacked(i, j) = M(i, j);
      stacked(M.rows + i, j) = -M(i, j);
    }
  Vec chat(2 * M.rows);
  for (int i = 0; i < M.rows; ++i) {
    chat[i] = c[i];
    chat[M.rows + i] = -c[i];
  }
  GameInstance game(std::move(stacked), Vec(M.cols, 0.0), std::move(chat), 1.0);
  GameSolveResult gr = solve_game(game, eps, seed, mode);
  RegressionResult out;
  out.x = gr.smd.avg_x;
  out.certified_gap = gr.gap;
  out.smd = std::move(gr.smd);
  return out;
}

}  // namespace mdpsmd
