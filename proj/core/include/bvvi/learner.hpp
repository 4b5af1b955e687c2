#pragma once

#include <cstdint>
#include <vector>

#include "bvvi/history_table.hpp"
#include "bvvi/model.hpp"

namespace bvvi {

/// Hindsight counts and the plug-in model they induce.
///
/// `estimate` carries mu-hat, T-hat and O-hat in TabularPomdp layout. Its
/// rewards are the known reward table (zero unless supplied). Rows whose
/// conditioning count is zero stay uniform.
struct EmpiricalModel {
  TabularPomdp estimate;
  std::uint64_t episodes = 0;
  std::vector<std::uint64_t> initial_counts;     // [s]
  std::vector<std::uint64_t> state_action_counts;  // [h-1][s][a], h in 1..H
  std::vector<std::uint64_t> state_counts;       // [h-1][s], h in 1..H+1
  std::vector<std::uint64_t> transition_counts;  // [h-1][a][s][s']
  std::vector<std::uint64_t> emission_counts;    // [step-2][s][o]

  int S() const { return estimate.S; }
  int O() const { return estimate.O; }
  int A() const { return estimate.A; }
  int H() const { return estimate.H; }

  std::uint64_t count_sa(int h, int s, int a) const {
    return state_action_counts[(static_cast<std::size_t>(h - 1) * S() + s) * A() + a];
  }
  std::uint64_t count_s(int h, int s) const { return state_counts[static_cast<std::size_t>(h - 1) * S() + s]; }
};

/// Uniform estimates, zero counts. `reward` (layout [h-1][s][a]) may be
/// empty, in which case rewards are zero.
EmpiricalModel init_empirical(int S, int O, int A, int H, const Vec& reward = {});

/// Adds one hindsight-revealed episode and recomputes every estimate from
/// the counts, N v 1 in the denominators. Throws MissingHindsight when the
/// record lacks hidden states.
EmpiricalModel update_empirical(const EmpiricalModel& emp, const EpisodeRecord& rec);

/// Transition residues t[h-1][s][a] for h in 1..H and emission residues
/// o[step-2][s] for step in 2..H+1.
struct Residues {
  int S = 0;
  int A = 0;
  Vec transition;
  Vec emission;

  double t(int h, int s, int a) const { return transition[(static_cast<std::size_t>(h - 1) * S + s) * A + a]; }
  double o(int step, int s) const { return emission[static_cast<std::size_t>(step - 2) * S + s]; }
};

/// t = min{1, 3 sqrt(S H iota / (N_h(s,a) v 1))},
/// o = min{1, 3 sqrt(O H iota / (N_step(s) v 1))}, both from the counts
/// available at planning time.
Residues residues(const EmpiricalModel& emp, const RiskParams& params);

/// |exp(gamma (H-h+1)) - 1| * min{1, t_h(s,a) + sum_{s'} T-hat(s'|s,a) o_{h+1}(s')}.
double bonus(const EmpiricalModel& emp, const Residues& res, int h, int s, int a, double gamma);

/// Bonuses b[h-1][s][a] together with the residues they came from.
struct BonusTable {
  Residues residues;
  RiskParams params;
  int S = 0;
  int A = 0;
  Vec values;

  double at(int h, int s, int a) const { return values[(static_cast<std::size_t>(h - 1) * S + s) * A + a]; }
};

BonusTable bonus_table(const EmpiricalModel& emp, const RiskParams& params);

/// Q and V per history. Entries for histories whose risk belief is zero are
/// NaN.
struct ValueTable {
  HistoryTable q;  // width A, steps 1..H
  HistoryTable v;  // width 1, steps 1..H
};

struct PlanResult {
  Policy policy;
  ValueTable values;
  HistoryTable beliefs;  // steps 1..H+1
  HistoryTable betas;    // steps 1..H+1, after bonus and clipping
  double v1 = 0.0;
};

struct PlanOptions {
  bool use_bonus = true;
  std::uint64_t history_cap = kDefaultHistoryCap;
};

/// Optimistic planning on the empirical model: risk beliefs forward over the
/// whole history tree, then beta value iteration backward with greedy
/// action choice (lowest index wins ties), bonus added with the sign of
/// gamma, and clipping into the admissible beta range.
PlanResult plan(const EmpiricalModel& emp, const RiskParams& params, const PlanOptions& options = {});

/// Plans on an explicit model with an optional bonus table (null: no bonus).
PlanResult plan_on_model(const TabularPomdp& model, double gamma, const BonusTable* bonuses,
                         std::uint64_t history_cap = kDefaultHistoryCap);

struct RunEntry {
  Policy policy;
  EpisodeRecord episode;
  double v1 = 0.0;
};

struct RunLog {
  std::vector<RunEntry> entries;
};

struct LearningOptions {
  std::uint64_t history_cap = kDefaultHistoryCap;
  bool use_bonus = true;
};

/// K episodes of plan -> play -> reveal -> update. Episode k draws from
/// CounterRng(seed, k).
RunLog run_learning(const TabularPomdp& model, int K, const RiskParams& params, std::uint64_t seed,
                    const LearningOptions& options = {});

}  // namespace bvvi
