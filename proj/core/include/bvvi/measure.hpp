#pragma once

#include <functional>
#include <span>
#include <utility>

#include "bvvi/model.hpp"

namespace bvvi {

/// Surrogate model whose emissions ignore the hidden state. Only the
/// observation law is stored; dynamics and rewards come from the base model.
struct ReferenceModel {
  Vec emission;

  static ReferenceModel uniform(int O);
  /// Throws std::invalid_argument unless strictly positive and summing to 1.
  void check(int O) const;
};

/// Full trajectory prefix: states s_1..s_h, observations o_2..o_h and either
/// h-1 or h actions.
struct Trajectory {
  std::vector<int> states;
  std::vector<int> actions;
  std::vector<int> observations;
};

/// Rejects gamma == 0 and |gamma|*(H+1) > 30.
void check_risk_level(double gamma, int H);

/// mu1(s_1) * prod pi(a_t|f_t) T(s_{t+1}|s_t,a_t) O(o_{t+1}|s_{t+1}), including
/// the policy factor of a trailing action when one is present.
double trajectory_probability(const TabularPomdp& model, const Policy& policy, const Trajectory& path);
double trajectory_probability(const TabularPomdp& model, const StochasticPolicy& policy, const Trajectory& path);
/// Same product with every emission factor replaced by the reference law.
double trajectory_probability(const TabularPomdp& model, const ReferenceModel& ref, const Policy& policy,
                              const Trajectory& path);
double trajectory_probability(const TabularPomdp& model, const ReferenceModel& ref, const StochasticPolicy& policy,
                              const Trajectory& path);

/// Likelihood ratio prod_{t=2..h} O_t(o_t|s_t) / ref(o_t); `states` and
/// `observations` both start at step 2. Empty input gives 1.
double rn_weight(const TabularPomdp& model, const ReferenceModel& ref, std::span<const int> states,
                 std::span<const int> observations);

/// Entropic risk (1/gamma) ln E[exp(gamma * total reward)] by exhaustive
/// enumeration of hidden paths and observations.
double exact_objective(const TabularPomdp& model, const Policy& policy, double gamma,
                       std::uint64_t cap = kDefaultHistoryCap);
double exact_objective(const TabularPomdp& model, const StochasticPolicy& policy, double gamma,
                       std::uint64_t cap = kDefaultHistoryCap);

/// Value of history f under `policy` in the uniform reference model,
/// (1/gamma) ln E'[D_{H+1} exp(gamma * total reward) | f], computed by
/// enumerating every full trajectory that extends f. Throws
/// UnreachableHistory when f has probability zero.
double conditional_value(const TabularPomdp& model, const Policy& policy, const History& f, double gamma,
                         std::uint64_t cap = kDefaultHistoryCap);

using TrajectoryFunction = std::function<double(const Trajectory&)>;

/// (E_P[f], E_P'[D_{H+1} f]) over complete trajectories (s_1..s_{H+1},
/// a_1..a_H, o_2..o_{H+1}). Both sides are summed by enumeration.
std::pair<double, double> change_of_measure_expectation(const TabularPomdp& model, const ReferenceModel& ref,
                                                        const Policy& policy, const TrajectoryFunction& f,
                                                        std::uint64_t cap = kDefaultHistoryCap);
std::pair<double, double> change_of_measure_expectation(const TabularPomdp& model, const ReferenceModel& ref,
                                                        const StochasticPolicy& policy, const TrajectoryFunction& f,
                                                        std::uint64_t cap = kDefaultHistoryCap);

/// Total reward sum_t r_t(s_t, a_t) of a complete trajectory.
double trajectory_return(const TabularPomdp& model, const Trajectory& path);

}  // namespace bvvi
