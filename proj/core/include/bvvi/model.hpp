#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bvvi/common.hpp"
#include "bvvi/rng.hpp"

namespace bvvi {

/// Finite-horizon tabular POMDP with step-dependent dynamics.
///
/// Steps are 1-based throughout the public API: transitions and rewards are
/// indexed by h in 1..H, emissions by the step of the emitting state in
/// 2..H+1. No observation is produced at step 1. Storage is flat:
///   trans_table  [h-1][a][s][s']
///   emit_table   [step-2][s][o]
///   reward_table [h-1][s][a]
struct TabularPomdp {
  int S = 1;
  int O = 1;
  int A = 1;
  int H = 1;
  Vec mu1;
  Vec trans_table;
  Vec emit_table;
  Vec reward_table;

  /// All tables zero-filled with the right shapes.
  static TabularPomdp zeros(int S, int O, int A, int H);

  std::size_t trans_offset(int h, int a, int s) const {
    return ((static_cast<std::size_t>(h - 1) * A + a) * S + s) * S;
  }
  std::size_t emit_offset(int step, int s) const {
    return (static_cast<std::size_t>(step - 2) * S + s) * O;
  }
  std::size_t reward_offset(int h, int s) const {
    return (static_cast<std::size_t>(h - 1) * S + s) * A;
  }

  double transition(int h, int a, int s, int next) const { return trans_table[trans_offset(h, a, s) + next]; }
  double& transition(int h, int a, int s, int next) { return trans_table[trans_offset(h, a, s) + next]; }
  double emission(int step, int s, int o) const { return emit_table[emit_offset(step, s) + o]; }
  double& emission(int step, int s, int o) { return emit_table[emit_offset(step, s) + o]; }
  double reward(int h, int s, int a) const { return reward_table[reward_offset(h, s) + a]; }
  double& reward(int h, int s, int a) { return reward_table[reward_offset(h, s) + a]; }

  std::span<const double> trans_row(int h, int a, int s) const {
    return {trans_table.data() + trans_offset(h, a, s), static_cast<std::size_t>(S)};
  }
  std::span<const double> emit_row(int step, int s) const {
    return {emit_table.data() + emit_offset(step, s), static_cast<std::size_t>(O)};
  }

  bool operator==(const TabularPomdp&) const = default;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

/// Checks shapes, stochasticity (1e-12), nonnegativity and reward range.
ValidationReport validate_model(const TabularPomdp& model);

/// Observable prefix (a_1, o_2, ..., a_{h-1}, o_h) of an episode.
struct History {
  std::vector<int> actions;
  std::vector<int> observations;

  int step() const { return static_cast<int>(actions.size()) + 1; }
  History child(int action, int observation) const;
  /// "h:a,o,a,o,..." as used by policy files.
  std::string key() const;
  static History from_key(const std::string& key);

  bool operator==(const History&) const = default;
};

/// (A*O)^(h-1), saturating.
std::uint64_t history_count(int A, int O, int h);

/// Position of `f` in the lexicographic order of its level; the first
/// (action, observation) pair is the most significant digit.
std::size_t history_index(const History& f, int A, int O);
History history_at(std::size_t index, int A, int O, int h);

inline std::size_t child_index(std::size_t parent, int A, int O, int action, int observation) {
  return parent * static_cast<std::size_t>(A) * O + static_cast<std::size_t>(action) * O + observation;
}

/// Every history of step h, lexicographically ordered.
std::vector<History> enumerate_histories(int A, int O, int h, std::uint64_t cap = kDefaultHistoryCap);

/// Deterministic history-dependent policy, total on the history tree of
/// shape (A, O, H). Actions are stored level by level in lexicographic
/// history order.
class Policy {
 public:
  Policy() = default;
  Policy(int A, int O, int H, std::uint64_t cap = kDefaultHistoryCap);

  static Policy constant(int A, int O, int H, int action);

  int A() const { return A_; }
  int O() const { return O_; }
  int H() const { return H_; }

  int action(int h, std::size_t index) const { return actions_[offsets_[h - 1] + index]; }
  int action(const History& f) const { return action(f.step(), history_index(f, A_, O_)); }
  void set(int h, std::size_t index, int a) { actions_[offsets_[h - 1] + index] = a; }
  void set(const History& f, int a) { set(f.step(), history_index(f, A_, O_), a); }

  /// Number of decision points, sum over h of (A*O)^(h-1).
  std::size_t size() const { return actions_.size(); }
  /// Flat view, level 1 first. Exposed for the policy-space iterator.
  std::span<int> flat() { return actions_; }
  std::span<const int> flat() const { return actions_; }

  bool operator==(const Policy&) const = default;

 private:
  int A_ = 0;
  int O_ = 0;
  int H_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<int> actions_;
};

/// History-dependent randomized policy; accepted by the exhaustive oracles.
class StochasticPolicy {
 public:
  StochasticPolicy(int A, int O, int H, std::uint64_t cap = kDefaultHistoryCap);
  explicit StochasticPolicy(const Policy& deterministic);

  int A() const { return A_; }
  int O() const { return O_; }
  int H() const { return H_; }

  std::span<const double> distribution(int h, std::size_t index) const {
    return {probs_.data() + (offsets_[h - 1] + index) * A_, static_cast<std::size_t>(A_)};
  }
  double probability(int h, std::size_t index, int a) const { return distribution(h, index)[a]; }
  void set(int h, std::size_t index, std::span<const double> dist);

 private:
  int A_;
  int O_;
  int H_;
  std::vector<std::size_t> offsets_;
  Vec probs_;
};

/// One episode: a_1..a_H, o_2..o_{H+1}, r_1..r_H and, once revealed in
/// hindsight, s_1..s_{H+1}.
struct EpisodeRecord {
  std::vector<int> actions;
  std::vector<int> observations;
  std::vector<double> rewards;
  std::vector<int> states;

  bool hindsight_revealed() const { return !states.empty(); }
  bool operator==(const EpisodeRecord&) const = default;
};

/// Plays one episode of `model` under `policy` and reveals the hidden states.
EpisodeRecord sample_episode(const TabularPomdp& model, const Policy& policy, CounterRng& rng);

struct RiskParams {
  double gamma = 0.0;
  double delta = 0.1;
  double iota = 0.0;

  /// iota = ln(K*H*S*O*A / delta). Throws NumericRangeError for gamma == 0
  /// and std::invalid_argument for delta outside (0,1) or K < 1.
  static RiskParams make(double gamma, double delta, int K, int S, int O, int A, int H);
};

}  // namespace bvvi
