#include "bvvi/measure.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bvvi {

ReferenceModel ReferenceModel::uniform(int O) { return ReferenceModel{Vec(O, 1.0 / O)}; }

void ReferenceModel::check(int O) const {
  if (emission.size() != static_cast<std::size_t>(O)) {
    throw std::invalid_argument("reference emission has " + std::to_string(emission.size()) + " entries, expected " +
                                std::to_string(O));
  }
  double sum = 0.0;
  for (double p : emission) {
    if (!(p > 0.0)) throw std::invalid_argument("reference emission must be strictly positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("reference emission does not sum to 1");
}

void check_risk_level(double gamma, int H) {
  if (gamma == 0.0 || !std::isfinite(gamma)) {
    throw NumericRangeError("risk level gamma must be finite and nonzero");
  }
  if (std::abs(gamma) * (H + 1) > 30.0) {
    throw NumericRangeError("|gamma|*(H+1) = " + std::to_string(std::abs(gamma) * (H + 1)) +
                            " exceeds 30; exponentials would leave double range");
  }
}

namespace {

struct DeterministicActions {
  const Policy& policy;
  template <class F>
  void each(int h, std::size_t index, F&& f) const {
    f(policy.action(h, index), 1.0);
  }
  double probability(int h, std::size_t index, int a) const { return policy.action(h, index) == a ? 1.0 : 0.0; }
  std::uint64_t branching() const { return 1; }
};

struct StochasticActions {
  const StochasticPolicy& policy;
  template <class F>
  void each(int h, std::size_t index, F&& f) const {
    const auto dist = policy.distribution(h, index);
    for (int a = 0; a < static_cast<int>(dist.size()); ++a) {
      if (dist[a] > 0.0) f(a, dist[a]);
    }
  }
  double probability(int h, std::size_t index, int a) const { return policy.probability(h, index, a); }
  std::uint64_t branching() const { return static_cast<std::uint64_t>(policy.A()); }
};

template <class Policyish>
void check_shape(const TabularPomdp& m, const Policyish& p) {
  if (p.A() != m.A || p.O() != m.O || p.H() != m.H) throw std::invalid_argument("policy shape does not match model");
}

void require_enumerable(const TabularPomdp& m, std::uint64_t branching, std::uint64_t cap) {
  // (S*O*A)^H leaves in the worst case.
  const std::uint64_t per_step = static_cast<std::uint64_t>(m.S) * m.O * branching;
  require_within_cap("trajectory enumeration", saturating_pow(per_step, m.H), cap);
}

// Depth-first walk over complete trajectories. Steps before `prefix`'s
// length follow the prefix's actions and observations; the policy factor
// still applies to them. With `prune` set, zero-probability branches are
// skipped.
template <class Actions, class Leaf>
class Walker {
 public:
  Walker(const TabularPomdp& m, const Actions& actions, const History* prefix, bool prune, Leaf& leaf)
      : m_(m), actions_(actions), prefix_(prefix), prune_(prune), leaf_(leaf) {
    path_.states.reserve(m.H + 1);
    path_.actions.reserve(m.H);
    path_.observations.reserve(m.H);
  }

  void run() {
    for (int s = 0; s < m_.S; ++s) {
      const double p = m_.mu1[s];
      if (prune_ && p == 0.0) continue;
      path_.states.push_back(s);
      step(1, 0, p, 0.0);
      path_.states.pop_back();
    }
  }

 private:
  void step(int h, std::size_t index, double weight, double ret) {
    if (h == m_.H + 1) {
      leaf_(path_, weight, ret);
      return;
    }
    const int s = path_.states.back();
    const bool forced = prefix_ != nullptr && h < prefix_->step();
    auto visit = [&](int a, double pa) {
      if (forced && a != prefix_->actions[h - 1]) return;
      const double r = m_.reward(h, s, a);
      path_.actions.push_back(a);
      const auto row = m_.trans_row(h, a, s);
      for (int next = 0; next < m_.S; ++next) {
        const double pt = row[next];
        if (prune_ && pt == 0.0) continue;
        path_.states.push_back(next);
        const auto emit = m_.emit_row(h + 1, next);
        for (int o = 0; o < m_.O; ++o) {
          if (forced && o != prefix_->observations[h - 1]) continue;
          const double po = emit[o];
          if (prune_ && po == 0.0) continue;
          path_.observations.push_back(o);
          step(h + 1, child_index(index, m_.A, m_.O, a, o), weight * pa * pt * po, ret + r);
          path_.observations.pop_back();
        }
        path_.states.pop_back();
      }
      path_.actions.pop_back();
    };
    actions_.each(h, index, visit);
  }

  const TabularPomdp& m_;
  const Actions& actions_;
  const History* prefix_;
  bool prune_;
  Leaf& leaf_;
  Trajectory path_;
};

template <class Actions, class Leaf>
void walk(const TabularPomdp& m, const Actions& actions, const History* prefix, bool prune, Leaf&& leaf) {
  Walker<Actions, std::remove_reference_t<Leaf>> walker(m, actions, prefix, prune, leaf);
  walker.run();
}

template <class Actions>
double path_probability(const TabularPomdp& m, const ReferenceModel* ref, const Actions& actions,
                        const Trajectory& path) {
  const std::size_t h = path.states.size();
  if (h == 0 || h > static_cast<std::size_t>(m.H) + 1) throw std::invalid_argument("trajectory length out of range");
  if (path.observations.size() != h - 1 || (path.actions.size() != h - 1 && path.actions.size() != h)) {
    throw std::invalid_argument("trajectory components have inconsistent lengths");
  }
  double p = m.mu1[path.states[0]];
  std::size_t index = 0;
  for (std::size_t t = 0; t < path.actions.size(); ++t) {
    const int step = static_cast<int>(t) + 1;
    if (step > m.H) throw std::invalid_argument("trajectory has an action beyond the horizon");
    const int a = path.actions[t];
    p *= actions.probability(step, index, a);
    if (t + 1 < h) {
      const int next = path.states[t + 1];
      const int o = path.observations[t];
      p *= m.transition(step, a, path.states[t], next);
      p *= ref ? ref->emission[o] : m.emission(step + 1, next, o);
      index = child_index(index, m.A, m.O, a, o);
    }
  }
  return p;
}

template <class Actions>
double objective_impl(const TabularPomdp& m, const Actions& actions, double gamma, std::uint64_t cap) {
  check_risk_level(gamma, m.H);
  require_enumerable(m, actions.branching(), cap);
  // exp(gamma*R - shift) <= 1 for R in [0,H].
  const double shift = gamma > 0.0 ? gamma * m.H : 0.0;
  double total = 0.0;
  walk(m, actions, nullptr, true,
       [&](const Trajectory&, double w, double ret) { total += w * std::exp(gamma * ret - shift); });
  return (shift + std::log(total)) / gamma;
}

template <class Actions>
std::pair<double, double> change_of_measure_impl(const TabularPomdp& m, const ReferenceModel& ref,
                                                 const Actions& actions, const TrajectoryFunction& f,
                                                 std::uint64_t cap) {
  ref.check(m.O);
  require_enumerable(m, actions.branching(), cap);
  double under_true = 0.0;
  double under_reference = 0.0;
  walk(m, actions, nullptr, false, [&](const Trajectory& path, double w, double) {
    const double value = f(path);
    under_true += w * value;
    const double w_ref = path_probability(m, &ref, actions, path);
    const std::span<const int> later_states(path.states.data() + 1, path.states.size() - 1);
    under_reference += w_ref * rn_weight(m, ref, later_states, path.observations) * value;
  });
  return {under_true, under_reference};
}

}  // namespace

double trajectory_probability(const TabularPomdp& model, const Policy& policy, const Trajectory& path) {
  check_shape(model, policy);
  return path_probability(model, nullptr, DeterministicActions{policy}, path);
}

double trajectory_probability(const TabularPomdp& model, const StochasticPolicy& policy, const Trajectory& path) {
  check_shape(model, policy);
  return path_probability(model, nullptr, StochasticActions{policy}, path);
}

double trajectory_probability(const TabularPomdp& model, const ReferenceModel& ref, const Policy& policy,
                              const Trajectory& path) {
  check_shape(model, policy);
  ref.check(model.O);
  return path_probability(model, &ref, DeterministicActions{policy}, path);
}

double trajectory_probability(const TabularPomdp& model, const ReferenceModel& ref, const StochasticPolicy& policy,
                              const Trajectory& path) {
  check_shape(model, policy);
  ref.check(model.O);
  return path_probability(model, &ref, StochasticActions{policy}, path);
}

double rn_weight(const TabularPomdp& model, const ReferenceModel& ref, std::span<const int> states,
                 std::span<const int> observations) {
  ref.check(model.O);
  if (states.size() != observations.size()) throw std::invalid_argument("states and observations differ in length");
  double d = 1.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const int step = static_cast<int>(i) + 2;
    d *= model.emission(step, states[i], observations[i]) / ref.emission[observations[i]];
  }
  return d;
}

double exact_objective(const TabularPomdp& model, const Policy& policy, double gamma, std::uint64_t cap) {
  check_shape(model, policy);
  return objective_impl(model, DeterministicActions{policy}, gamma, cap);
}

double exact_objective(const TabularPomdp& model, const StochasticPolicy& policy, double gamma, std::uint64_t cap) {
  check_shape(model, policy);
  return objective_impl(model, StochasticActions{policy}, gamma, cap);
}

double conditional_value(const TabularPomdp& model, const Policy& policy, const History& f, double gamma,
                         std::uint64_t cap) {
  check_shape(model, policy);
  check_risk_level(gamma, model.H);
  if (f.step() > model.H + 1) throw StepRangeError("history " + f.key() + " is beyond step H+1");
  require_enumerable(model, 1, cap);
  const double shift = gamma > 0.0 ? gamma * model.H : 0.0;
  double total = 0.0;
  walk(model, DeterministicActions{policy}, &f, true,
       [&](const Trajectory&, double w, double ret) { total += w * std::exp(gamma * ret - shift); });
  if (!(total > 0.0)) throw UnreachableHistory("history " + f.key() + " has probability zero");
  // Conditioning on f in the reference model divides by (1/O)^(h-1).
  return (shift + std::log(total) + (f.step() - 1) * std::log(static_cast<double>(model.O))) / gamma;
}

std::pair<double, double> change_of_measure_expectation(const TabularPomdp& model, const ReferenceModel& ref,
                                                        const Policy& policy, const TrajectoryFunction& f,
                                                        std::uint64_t cap) {
  check_shape(model, policy);
  return change_of_measure_impl(model, ref, DeterministicActions{policy}, f, cap);
}

std::pair<double, double> change_of_measure_expectation(const TabularPomdp& model, const ReferenceModel& ref,
                                                        const StochasticPolicy& policy, const TrajectoryFunction& f,
                                                        std::uint64_t cap) {
  check_shape(model, policy);
  return change_of_measure_impl(model, ref, StochasticActions{policy}, f, cap);
}

double trajectory_return(const TabularPomdp& model, const Trajectory& path) {
  double ret = 0.0;
  for (std::size_t t = 0; t < path.actions.size() && t < path.states.size(); ++t) {
    ret += model.reward(static_cast<int>(t) + 1, path.states[t], path.actions[t]);
  }
  return ret;
}

}  // namespace bvvi
