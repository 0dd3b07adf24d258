#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdpsmd/linalg.hpp"
#include "mdpsmd/rng.hpp"
#include "mdpsmd/sampling.hpp"

namespace mdpsmd {

// Tabular MDP. State-action pairs are flattened into rows in state-major
// order; row r of `transitions` is the next-state distribution of pair r.
struct MdpInstance {
  int S = 0;
  std::vector<int> actions;      // per-state action counts
  std::vector<int> row_offset;   // state -> first row
  std::vector<int> row_state;    // row -> owning state
  Mat transitions;               // A x S
  Vec rewards;                   // A, entries in [0,1]
  std::optional<double> gamma;   // discount, absent for average reward
  std::optional<Vec> q;          // initial distribution over states
  std::optional<Mat> D;          // A x K nonnegative constraint columns

  int total_pairs() const { return static_cast<int>(rewards.size()); }
  int row(int state, int a) const { return row_offset[state] + a; }
  bool discounted() const { return gamma.has_value(); }

  void rebuild_index();  // fills row_offset / row_state from `actions`
  void validate() const;

  static MdpInstance load(const std::string& path);
  static MdpInstance from_json_text(const std::string& text);
  std::string to_json_text() const;
  void save(const std::string& path) const;
};

// Per-state distributions over that state's actions.
struct Policy {
  std::vector<Vec> rows;

  static Policy uniform(const MdpInstance& mdp);
  static Policy deterministic(const MdpInstance& mdp, const std::vector<int>& choice);
  void validate(const MdpInstance& mdp) const;
};

struct PolicyEvaluation {
  Vec stationary;  // AMDP path
  double v_bar = 0.0;
  Vec value;       // DMDP value vector, AMDP bias vector
};

struct OptimalSolution {
  double v_bar = 0.0;
  Policy policy;
  Vec v_star;  // AMDP: bias with <nu*, v*> = 0; DMDP: value vector
};

struct NormBoundReport {
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

// P^pi (row-stochastic S x S) and r^pi from policy-weighted rows.
std::pair<Mat, Vec> induced_chain(const MdpInstance& mdp, const Policy& pi);

// Unique stationary distribution of a row-stochastic matrix; throws
// NonUniqueStationary when the chain does not determine one.
Vec stationary_distribution(const Mat& Ppi);

PolicyEvaluation evaluate_policy(const MdpInstance& mdp, const Policy& pi);

// DMDP: value iteration + greedy policy + exact evaluation.
// AMDP: exhaustive deterministic-policy enumeration (desk scale only).
OptimalSolution optimal_oracle(const MdpInstance& mdp);

// Smallest t (maximized over deterministic policies) such that every row of
// (P^pi)^t is within l1 distance 1/2 of the stationary distribution.
int mixing_time(const MdpInstance& mdp);

// Exact inverse-norm checks: ||(I-P^pi+1 nu^T)^{-1}||_inf <= 2 t_mix for the
// average-reward path, ||(I-gamma P^pi)^{-1}||_inf <= 1/(1-gamma) for the
// discounted path.
NormBoundReport verify_norm_bounds(const MdpInstance& mdp, const Policy& pi);
NormBoundReport verify_norm_bounds(const MdpInstance& mdp, const Policy& pi, int t_mix);

enum class InstanceKind { RandomMixing, RandomDmdp, Constrained };

struct GeneratorParams {
  int S = 4;
  int actions = 2;        // actions per state
  double alpha = 0.3;     // uniform smoothing weight on transition rows
  double gamma = 0.9;     // RandomDmdp only
  int K = 2;              // Constrained only
  double d_max = 1.0;     // Constrained only: raw entry scale before feasibility rescale
  double feas_margin = 0.15;
};

MdpInstance generate_instance(InstanceKind kind, const GeneratorParams& params, uint64_t seed);

// Generative-model access: per-row alias tables plus a draw counter.
class GenerativeModel {
 public:
  explicit GenerativeModel(const MdpInstance& mdp);

  int sample(int row, RngStream& rng) const;
  long long samples_drawn() const { return count_; }
  void reset_counter() { count_ = 0; }

 private:
  std::vector<AliasTable> row_alias_;
  int S_ = 0;
  mutable long long count_ = 0;
};

std::vector<std::vector<int>> enumerate_deterministic_policies(const MdpInstance& mdp,
                                                               long long limit);

}  // namespace mdpsmd
