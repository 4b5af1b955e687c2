#include "bvvi/belief.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bvvi/measure.hpp"

namespace bvvi {

void UpdateOperator::apply(std::span<const double> x, std::span<double> out) const {
  for (int row = 0; row < S; ++row) {
    double acc = 0.0;
    const double* m = matrix.data() + static_cast<std::size_t>(row) * S;
    for (int col = 0; col < S; ++col) acc += m[col] * x[col];
    out[row] = acc;
  }
}

void UpdateOperator::apply_transpose(std::span<const double> x, std::span<double> out) const {
  for (int col = 0; col < S; ++col) out[col] = 0.0;
  for (int row = 0; row < S; ++row) {
    const double* m = matrix.data() + static_cast<std::size_t>(row) * S;
    for (int col = 0; col < S; ++col) out[col] += m[col] * x[row];
  }
}

UpdateOperator build_update_operator(const TabularPomdp& model, int h, int a, int o, double gamma) {
  check_risk_level(gamma, model.H);
  if (h < 1 || h > model.H) throw StepRangeError("update operator step " + std::to_string(h) + " outside 1..H");
  UpdateOperator u;
  u.h = h;
  u.a = a;
  u.o = o;
  u.S = model.S;
  u.matrix.assign(static_cast<std::size_t>(model.S) * model.S, 0.0);
  const double scale = static_cast<double>(model.O);
  for (int next = 0; next < model.S; ++next) {
    const double emit = scale * model.emission(h + 1, next, o);
    for (int s = 0; s < model.S; ++s) {
      u.matrix[static_cast<std::size_t>(next) * model.S + s] =
          emit * model.transition(h, a, s, next) * std::exp(gamma * model.reward(h, s, a));
    }
  }
  return u;
}

RiskBelief initial_belief(const TabularPomdp& model) { return RiskBelief{History{}, model.mu1}; }

RiskBelief propagate_belief(const RiskBelief& sigma, int a, int o, const TabularPomdp& model, double gamma) {
  const int h = sigma.step();
  if (h > model.H) throw StepRangeError("cannot propagate a belief past step H+1");
  const UpdateOperator u = build_update_operator(model, h, a, o, gamma);
  RiskBelief out{sigma.history.child(a, o), Vec(model.S, 0.0)};
  u.apply(sigma.vec, out.vec);
  return out;
}

Vec belief_by_definition(const TabularPomdp& model, const History& f, double gamma, std::uint64_t cap) {
  check_risk_level(gamma, model.H);
  const int h = f.step();
  if (h > model.H + 1) throw StepRangeError("history " + f.key() + " is beyond step H+1");
  require_within_cap("hidden paths", saturating_pow(static_cast<std::uint64_t>(model.S), h), cap);
  Vec sigma(model.S, 0.0);
  // Reference-model weight of a hidden path given f is
  //   mu1(s_1) prod T(s_{t+1}|s_t,a_t) * prod ref(o_t),
  // the Radon-Nikodym factor is prod O_t(o_t|s_t)/ref(o_t), and conditioning
  // on f divides by prod ref(o_t). With a uniform reference this leaves
  //   mu1 prod T * prod O * O_t(o_t|s_t) * exp(gamma * partial return).
  std::vector<int> path(h, 0);
  const std::uint64_t total = saturating_pow(static_cast<std::uint64_t>(model.S), h);
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t c = code;
    for (int t = h - 1; t >= 0; --t) {
      path[t] = static_cast<int>(c % model.S);
      c /= model.S;
    }
    double w = model.mu1[path[0]];
    double ret = 0.0;
    for (int t = 1; t < h && w != 0.0; ++t) {
      const int a = f.actions[t - 1];
      const int o = f.observations[t - 1];
      const double ref = 1.0 / model.O;
      const double d = model.emission(t + 1, path[t], o) / ref;
      w *= model.transition(t, a, path[t - 1], path[t]) * ref * d / ref;
      ret += model.reward(t, path[t - 1], a);
    }
    sigma[path[h - 1]] += w * std::exp(gamma * ret);
  }
  return sigma;
}

ConjugateBelief terminal_conjugate(const TabularPomdp& model) {
  ConjugateBelief nu;
  nu.h = model.H + 1;
  nu.vec.assign(model.S, 1.0);
  return nu;
}

ConjugateBelief propagate_conjugate(const ConjugateBelief& nu, int a, int o, const TabularPomdp& model,
                                    double gamma) {
  if (nu.h <= 1) throw StepRangeError("cannot propagate a conjugate belief below step 1");
  const int h = nu.h - 1;
  const UpdateOperator u = build_update_operator(model, h, a, o, gamma);
  ConjugateBelief out;
  out.h = h;
  out.actions.reserve(nu.actions.size() + 1);
  out.actions.push_back(a);
  out.actions.insert(out.actions.end(), nu.actions.begin(), nu.actions.end());
  out.observations.push_back(o);
  out.observations.insert(out.observations.end(), nu.observations.begin(), nu.observations.end());
  out.vec.assign(model.S, 0.0);
  u.apply_transpose(nu.vec, out.vec);
  return out;
}

Vec inner_product_trace(const TabularPomdp& model, const Policy& policy, std::span<const int> actions,
                        std::span<const int> observations, double gamma) {
  const auto H = static_cast<std::size_t>(model.H);
  if (actions.size() != H || observations.size() != H) {
    throw std::invalid_argument("trajectory must hold H actions and H observations");
  }
  std::vector<RiskBelief> sigmas{initial_belief(model)};
  for (std::size_t t = 0; t < H; ++t) {
    if (policy.action(sigmas.back().history) != actions[t]) {
      throw std::invalid_argument("trajectory disagrees with the policy at step " + std::to_string(t + 1));
    }
    sigmas.push_back(propagate_belief(sigmas.back(), actions[t], observations[t], model, gamma));
  }
  Vec trace(H + 1, 0.0);
  ConjugateBelief nu = terminal_conjugate(model);
  trace[H] = dot(sigmas[H].vec, nu.vec);
  for (std::size_t t = H; t-- > 0;) {
    nu = propagate_conjugate(nu, actions[t], observations[t], model, gamma);
    trace[t] = dot(sigmas[t].vec, nu.vec);
  }
  return trace;
}

HistoryTable belief_table(const TabularPomdp& model, double gamma, std::uint64_t cap) {
  check_risk_level(gamma, model.H);
  HistoryTable table(model.A, model.O, model.H + 1, model.S, 0.0, cap);
  std::copy(model.mu1.begin(), model.mu1.end(), table.at(1, 0).begin());
  for (int h = 1; h <= model.H; ++h) {
    std::vector<UpdateOperator> ops;
    ops.reserve(static_cast<std::size_t>(model.A) * model.O);
    for (int a = 0; a < model.A; ++a) {
      for (int o = 0; o < model.O; ++o) ops.push_back(build_update_operator(model, h, a, o, gamma));
    }
    const std::size_t n = table.count(h);
    for (std::size_t i = 0; i < n; ++i) {
      const auto sigma = table.at(h, i);
      for (int a = 0; a < model.A; ++a) {
        for (int o = 0; o < model.O; ++o) {
          ops[static_cast<std::size_t>(a) * model.O + o].apply(sigma,
                                                              table.at(h + 1, child_index(i, model.A, model.O, a, o)));
        }
      }
    }
  }
  return table;
}

}  // namespace bvvi
