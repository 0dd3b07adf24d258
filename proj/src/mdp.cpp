#include "mdpsmd/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdpsmd/errors.hpp"

namespace mdpsmd {

using nlohmann::json;

void MdpInstance::rebuild_index() {
  row_offset.assign(S, 0);
  row_state.clear();
  int r = 0;
  for (int i = 0; i < S; ++i) {
    row_offset[i] = r;
    for (int a = 0; a < actions[i]; ++a) {
      row_state.push_back(i);
      ++r;
    }
  }
}

void MdpInstance::validate() const {
  if (S <= 0 || static_cast<int>(actions.size()) != S)
    throw ConfigError("mdp: bad state/action layout");
  int A = 0;
  for (int a : actions) {
    if (a <= 0) throw ConfigError("mdp: every state needs at least one action");
    A += a;
  }
  if (transitions.rows != A || transitions.cols != S || static_cast<int>(rewards.size()) != A)
    throw ConfigError("mdp: transition/reward shape mismatch");
  for (int r = 0; r < A; ++r) {
    double sum = 0.0;
    for (int j = 0; j < S; ++j) {
      double p = transitions(r, j);
      if (p < 0.0 || !std::isfinite(p)) throw ConfigError("mdp: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mdp: transition row does not sum to 1");
  }
  for (double r : rewards)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("mdp: rewards must lie in [0,1]");
  if (gamma && !(*gamma > 0.0 && *gamma < 1.0)) throw ConfigError("mdp: gamma must lie in (0,1)");
  if (q) {
    if (static_cast<int>(q->size()) != S) throw ConfigError("mdp: q dimension mismatch");
    double sum = 0.0;
    for (double p : *q) {
      if (p < 0.0) throw ConfigError("mdp: q has negative entries");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("mdp: q does not sum to 1");
  }
  if (D) {
    if (D->rows != A) throw ConfigError("mdp: D row count mismatch");
    for (double d : D->a)
      if (d < 0.0 || !std::isfinite(d)) throw ConfigError("mdp: D entries must be nonnegative");
  }
}

MdpInstance MdpInstance::from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != std::string("mdp-smd/v1"))
    throw ConfigError("mdp load: unknown format tag");
  MdpInstance m;
  m.S = j.at("S").get<int>();
  m.actions = j.at("actions").get<std::vector<int>>();
  m.rebuild_index();
  auto rows = j.at("transitions").get<std::vector<Vec>>();
  int A = static_cast<int>(rows.size());
  m.transitions = Mat(A, m.S);
  for (int r = 0; r < A; ++r) {
    if (static_cast<int>(rows[r].size()) != m.S) throw ConfigError("mdp load: ragged transition row");
    for (int c = 0; c < m.S; ++c) m.transitions(r, c) = rows[r][c];
  }
  m.rewards = j.at("rewards").get<Vec>();
  if (j.contains("gamma") && !j.at("gamma").is_null()) m.gamma = j.at("gamma").get<double>();
  if (j.contains("q") && !j.at("q").is_null()) m.q = j.at("q").get<Vec>();
  if (j.contains("D") && !j.at("D").is_null()) {
    auto drows = j.at("D").get<std::vector<Vec>>();
    if (drows.empty()) throw ConfigError("mdp load: empty D");
    int K = static_cast<int>(drows[0].size());
    Mat D(static_cast<int>(drows.size()), K);
    for (size_t r = 0; r < drows.size(); ++r) {
      if (static_cast<int>(drows[r].size()) != K) throw ConfigError("mdp load: ragged D row");
      for (int c = 0; c < K; ++c) D(static_cast<int>(r), c) = drows[r][c];
    }
    m.D = std::move(D);
  }
  m.validate();
  return m;
}

MdpInstance MdpInstance::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("mdp load: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string MdpInstance::to_json_text() const {
  json j;
  j["format"] = "mdp-smd/v1";
  j["S"] = S;
  j["actions"] = actions;
  std::vector<Vec> rows(total_pairs());
  for (int r = 0; r < total_pairs(); ++r)
    rows[r] = Vec(transitions.row_ptr(r), transitions.row_ptr(r) + S);
  j["transitions"] = rows;
  j["rewards"] = rewards;
  j["gamma"] = gamma ? json(*gamma) : json(nullptr);
  j["q"] = q ? json(*q) : json(nullptr);
  if (D) {
    std::vector<Vec> drows(D->rows);
    for (int r = 0; r < D->rows; ++r) drows[r] = Vec(D->row_ptr(r), D->row_ptr(r) + D->cols);
    j["D"] = drows;
  } else {
    j["D"] = nullptr;
  }
  return j.dump(2) + "\n";
}

void MdpInstance::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("mdp save: cannot open " + path);
  out << to_json_text();
}

Policy Policy::uniform(const MdpInstance& mdp) {
  Policy p;
  p.rows.resize(mdp.S);
  for (int i = 0; i < mdp.S; ++i) p.rows[i].assign(mdp.actions[i], 1.0 / mdp.actions[i]);
  return p;
}

Policy Policy::deterministic(const MdpInstance& mdp, const std::vector<int>& choice) {
  Policy p;
  p.rows.resize(mdp.S);
  for (int i = 0; i < mdp.S; ++i) {
    p.rows[i].assign(mdp.actions[i], 0.0);
    p.rows[i][choice[i]] = 1.0;
  }
  return p;
}

void Policy::validate(const MdpInstance& mdp) const {
  if (static_cast<int>(rows.size()) != mdp.S) throw ConfigError("policy: state count mismatch");
  for (int i = 0; i < mdp.S; ++i) {
    if (static_cast<int>(rows[i].size()) != mdp.actions[i])
      throw ConfigError("policy: action count mismatch");
    double sum = 0.0;
    for (double p : rows[i]) {
      if (p < 0.0) throw ConfigError("policy: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("policy: row does not sum to 1");
  }
}

std::pair<Mat, Vec> induced_chain(const MdpInstance& mdp, const Policy& pi) {
  pi.validate(mdp);
  Mat P(mdp.S, mdp.S);
  Vec r(mdp.S, 0.0);
  for (int i = 0; i < mdp.S; ++i) {
    for (int a = 0; a < mdp.actions[i]; ++a) {
      double w = pi.rows[i][a];
      if (w == 0.0) continue;
      int row = mdp.row(i, a);
      for (int j = 0; j < mdp.S; ++j) P(i, j) += w * mdp.transitions(row, j);
      r[i] += w * mdp.rewards[row];
    }
  }
  return {P, r};
}

Vec stationary_distribution(const Mat& Ppi) {
  int n = Ppi.rows;
  // (P^T - I + 11^T) nu = 1 pins both stationarity and normalization; the
  // system is singular exactly when the stationary distribution is not unique.
  Mat C(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) C(i, j) = Ppi(j, i) - (i == j ? 1.0 : 0.0) + 1.0;
  Vec ones(n, 1.0);
  Vec nu;
  try {
    nu = solve_linear(C, ones);
  } catch (const SingularMatrix&) {
    throw NonUniqueStationary("stationary_distribution: chain has no unique stationary law");
  }
  for (double& v : nu) {
    if (v < -1e-9) throw NonUniqueStationary("stationary_distribution: negative mass in solution");
    v = std::max(v, 0.0);
  }
  double sum = 0.0;
  for (double v : nu) sum += v;
  for (double& v : nu) v /= sum;
  Vec res = matvec_t(Ppi, nu);
  for (int i = 0; i < n; ++i) res[i] -= nu[i];
  if (linf_norm(res) > 1e-9)
    throw NonUniqueStationary("stationary_distribution: residual too large");
  return nu;
}

PolicyEvaluation evaluate_policy(const MdpInstance& mdp, const Policy& pi) {
  auto [P, r] = induced_chain(mdp, pi);
  PolicyEvaluation ev;
  if (mdp.discounted()) {
    if (!mdp.q) throw ConfigError("evaluate_policy: discounted evaluation needs q");
    double g = *mdp.gamma;
    Mat A(mdp.S, mdp.S);
    for (int i = 0; i < mdp.S; ++i)
      for (int j = 0; j < mdp.S; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - g * P(i, j);
    ev.value = solve_linear(A, r);
    ev.v_bar = dot(*mdp.q, ev.value);
  } else {
    ev.stationary = stationary_distribution(P);
    ev.v_bar = dot(ev.stationary, r);
    // bias vector h with <nu, h> = 0: (I - P + 1 nu^T) h = r - v_bar 1
    Mat A(mdp.S, mdp.S);
    for (int i = 0; i < mdp.S; ++i)
      for (int j = 0; j < mdp.S; ++j)
        A(i, j) = (i == j ? 1.0 : 0.0) - P(i, j) + ev.stationary[j];
    Vec rhs(mdp.S);
    for (int i = 0; i < mdp.S; ++i) rhs[i] = r[i] - ev.v_bar;
    ev.value = solve_linear(A, rhs);
  }
  return ev;
}

std::vector<std::vector<int>> enumerate_deterministic_policies(const MdpInstance& mdp,
                                                               long long limit) {
  long long total = 1;
  for (int a : mdp.actions) {
    total *= a;
    if (total > limit)
      throw OracleTooLarge("deterministic policy enumeration exceeds the configured limit");
  }
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<size_t>(total));
  std::vector<int> choice(mdp.S, 0);
  for (long long k = 0; k < total; ++k) {
    out.push_back(choice);
    for (int i = 0; i < mdp.S; ++i) {
      if (++choice[i] < mdp.actions[i]) break;
      choice[i] = 0;
    }
  }
  return out;
}

OptimalSolution optimal_oracle(const MdpInstance& mdp) {
  OptimalSolution best;
  if (mdp.discounted()) {
    if (!mdp.q) throw ConfigError("optimal_oracle: discounted path needs q");
    double g = *mdp.gamma;
    int A = mdp.total_pairs();
    Vec v(mdp.S, 0.0);
    double tol = 1e-10 * (1.0 - g) / g;
    for (int iter = 0; iter < 1000000; ++iter) {
      Vec next(mdp.S, 0.0);
      for (int i = 0; i < mdp.S; ++i) {
        double bestq = -1e300;
        for (int a = 0; a < mdp.actions[i]; ++a) {
          int r = mdp.row(i, a);
          double qv = mdp.rewards[r];
          const double* row = mdp.transitions.row_ptr(r);
          for (int j = 0; j < mdp.S; ++j) qv += g * row[j] * v[j];
          bestq = std::max(bestq, qv);
        }
        next[i] = bestq;
      }
      double delta = linf_diff(next, v);
      v = next;
      if (delta <= tol) break;
    }
    std::vector<int> choice(mdp.S, 0);
    for (int i = 0; i < mdp.S; ++i) {
      double bestq = -1e300;
      for (int a = 0; a < mdp.actions[i]; ++a) {
        int r = mdp.row(i, a);
        double qv = mdp.rewards[r];
        const double* row = mdp.transitions.row_ptr(r);
        for (int j = 0; j < mdp.S; ++j) qv += g * row[j] * v[j];
        if (qv > bestq) {
          bestq = qv;
          choice[i] = a;
        }
      }
    }
    best.policy = Policy::deterministic(mdp, choice);
    PolicyEvaluation ev = evaluate_policy(mdp, best.policy);
    best.v_bar = ev.v_bar;
    best.v_star = ev.value;
    (void)A;
    return best;
  }

  if (mdp.S > 8) throw OracleTooLarge("optimal_oracle: average-reward enumeration limited to S <= 8");
  auto policies = enumerate_deterministic_policies(mdp, 100000);
  bool have = false;
  PolicyEvaluation best_ev;
  for (const auto& choice : policies) {
    Policy pi = Policy::deterministic(mdp, choice);
    PolicyEvaluation ev = evaluate_policy(mdp, pi);
    if (!have || ev.v_bar > best.v_bar) {
      have = true;
      best.v_bar = ev.v_bar;
      best.policy = pi;
      best_ev = ev;
    }
  }
  best.v_star = best_ev.value;
  // Bellman optimality residual; fails only on degenerate (non-mixing) input.
  double worst = 0.0;
  for (int i = 0; i < mdp.S; ++i)
    for (int a = 0; a < mdp.actions[i]; ++a) {
      int r = mdp.row(i, a);
      double q = mdp.rewards[r];
      const double* row = mdp.transitions.row_ptr(r);
      for (int j = 0; j < mdp.S; ++j) q += row[j] * best.v_star[j];
      worst = std::max(worst, q - best.v_star[i] - best.v_bar);
    }
  if (worst > 1e-8)
    throw NotMixing("optimal_oracle: enumerated optimum violates the Bellman equation");
  return best;
}

namespace {

// max_i || P^t(i,:) - nu ||_1, monotone nonincreasing in t.
double chain_distance(const Mat& Pt, const Vec& nu) {
  double worst = 0.0;
  for (int i = 0; i < Pt.rows; ++i) {
    double d = 0.0;
    for (int j = 0; j < Pt.cols; ++j) d += std::abs(Pt(i, j) - nu[j]);
    worst = std::max(worst, d);
  }
  return worst;
}

int chain_mixing_time(const Mat& P, const Vec& nu, int cap) {
  Mat Pt = P;
  for (int t = 1; t <= cap; ++t) {
    if (chain_distance(Pt, nu) <= 0.5) return t;
    Pt = matmul(Pt, P);
  }
  throw NotMixing("mixing_time: l1 distance never reached 1/2");
}

}  // namespace

int mixing_time(const MdpInstance& mdp) {
  if (mdp.S > 8) throw OracleTooLarge("mixing_time: limited to S <= 8");
  auto policies = enumerate_deterministic_policies(mdp, 100000);
  int worst = 0;
  for (const auto& choice : policies) {
    Policy pi = Policy::deterministic(mdp, choice);
    auto [P, r] = induced_chain(mdp, pi);
    Vec nu;
    try {
      nu = stationary_distribution(P);
    } catch (const NonUniqueStationary&) {
      throw NotMixing("mixing_time: some policy has no unique stationary distribution");
    }
    worst = std::max(worst, chain_mixing_time(P, nu, 10000));
  }
  return worst;
}

NormBoundReport verify_norm_bounds(const MdpInstance& mdp, const Policy& pi, int t_mix) {
  auto [P, r] = induced_chain(mdp, pi);
  NormBoundReport rep;
  if (mdp.discounted()) {
    double g = *mdp.gamma;
    Mat A(mdp.S, mdp.S);
    for (int i = 0; i < mdp.S; ++i)
      for (int j = 0; j < mdp.S; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - g * P(i, j);
    rep.measured = inf_operator_norm(invert(A));
    rep.bound = 1.0 / (1.0 - g);
  } else {
    Vec nu = stationary_distribution(P);
    Mat A(mdp.S, mdp.S);
    for (int i = 0; i < mdp.S; ++i)
      for (int j = 0; j < mdp.S; ++j) A(i, j) = (i == j ? 1.0 : 0.0) - P(i, j) + nu[j];
    rep.measured = inf_operator_norm(invert(A));
    rep.bound = 2.0 * t_mix;
  }
  rep.pass = rep.measured <= rep.bound + 1e-9;
  return rep;
}

NormBoundReport verify_norm_bounds(const MdpInstance& mdp, const Policy& pi) {
  int tm = mdp.discounted() ? 0 : mixing_time(mdp);
  return verify_norm_bounds(mdp, pi, tm);
}

MdpInstance generate_instance(InstanceKind kind, const GeneratorParams& params, uint64_t seed) {
  if (params.S <= 0 || params.actions <= 0 || !(params.alpha > 0.0 && params.alpha <= 1.0))
    throw ConfigError("generate_instance: bad parameters");
  RngState rng(seed);
  RngStream gen = rng.stream(kStreamGenerator);

  MdpInstance m;
  m.S = params.S;
  m.actions.assign(params.S, params.actions);
  m.rebuild_index();
  int A = params.S * params.actions;
  m.transitions = Mat(A, params.S);
  m.rewards.assign(A, 0.0);

  for (int r = 0; r < A; ++r) {
    double total = 0.0;
    Vec raw(params.S);
    for (int j = 0; j < params.S; ++j) {
      // exponential draws normalize to a flat Dirichlet row
      raw[j] = -std::log(1.0 - gen.next_double());
      total += raw[j];
    }
    for (int j = 0; j < params.S; ++j)
      m.transitions(r, j) = (1.0 - params.alpha) * raw[j] / total + params.alpha / params.S;
    m.rewards[r] = gen.next_double();
  }

  if (kind == InstanceKind::RandomDmdp) {
    if (!(params.gamma > 0.0 && params.gamma < 1.0))
      throw ConfigError("generate_instance: gamma must lie in (0,1)");
    m.gamma = params.gamma;
    m.q = Vec(params.S, 1.0 / params.S);
  } else if (kind == InstanceKind::Constrained) {
    if (params.K <= 0 || !(params.d_max > 0.0))
      throw ConfigError("generate_instance: constrained generation needs K > 0, d_max > 0");
    Policy uni = Policy::uniform(m);
    auto [P, rpi] = induced_chain(m, uni);
    Vec nu = stationary_distribution(P);
    Vec mu_ref(A, 0.0);
    for (int r = 0; r < A; ++r) mu_ref[r] = nu[m.row_state[r]] / m.actions[m.row_state[r]];

    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      Mat D(A, params.K);
      for (int r = 0; r < A; ++r)
        for (int k = 0; k < params.K; ++k) D(r, k) = params.d_max * gen.next_double();
      // Column rescale so the uniform policy certifies strict feasibility:
      // D^T mu_ref = 1/(1-margin) > 1 componentwise.
      bool valid = true;
      for (int k = 0; k < params.K && valid; ++k) {
        double ck = 0.0;
        for (int r = 0; r < A; ++r) ck += D(r, k) * mu_ref[r];
        if (ck <= 1e-12) {
          valid = false;
          break;
        }
        double scale = 1.0 / ((1.0 - params.feas_margin) * ck);
        for (int r = 0; r < A; ++r) D(r, k) *= scale;
      }
      if (valid) {
        m.D = std::move(D);
        ok = true;
      }
    }
    if (!ok) throw InfeasibleInstance("generate_instance: no strictly feasible D after 100 attempts");
  }

  m.validate();
  return m;
}

GenerativeModel::GenerativeModel(const MdpInstance& mdp) : S_(mdp.S) {
  row_alias_.reserve(mdp.total_pairs());
  for (int r = 0; r < mdp.total_pairs(); ++r)
    row_alias_.emplace_back(Vec(mdp.transitions.row_ptr(r), mdp.transitions.row_ptr(r) + mdp.S));
}

int GenerativeModel::sample(int row, RngStream& rng) const {
  if (row < 0 || row >= static_cast<int>(row_alias_.size()))
    throw std::out_of_range("generative sample: bad state-action pair");
  ++count_;
  return row_alias_[row].sample(rng);
}

}  // namespace mdpsmd
