#include "bvvi/beta.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "bvvi/measure.hpp"

namespace bvvi {

std::pair<double, double> beta_bounds(double gamma, int H, int h) {
  const double remaining = static_cast<double>(H - h + 1);
  return {std::exp(std::min(gamma, 0.0) * remaining), std::exp(std::max(gamma, 0.0) * remaining)};
}

void backup_beta(const TabularPomdp& model, int h, int a, std::span<const double> children, double gamma,
                 std::span<double> out) {
  const int S = model.S;
  const int O = model.O;
  // Collapse the observation sum first: w[s'] = sum_o O(o|s') child_o[s'].
  double w_stack[16];
  Vec w_heap;
  double* w = w_stack;
  if (S > 16) {
    w_heap.assign(S, 0.0);
    w = w_heap.data();
  }
  for (int next = 0; next < S; ++next) {
    const auto emit = model.emit_row(h + 1, next);
    double acc = 0.0;
    for (int o = 0; o < O; ++o) acc += emit[o] * children[static_cast<std::size_t>(o) * S + next];
    w[next] = acc;
  }
  for (int s = 0; s < S; ++s) {
    const auto row = model.trans_row(h, a, s);
    double acc = 0.0;
    for (int next = 0; next < S; ++next) acc += row[next] * w[next];
    out[s] = std::exp(gamma * model.reward(h, s, a)) * acc;
  }
}

namespace {

Vec pack_children(const TabularPomdp& model, const std::vector<Vec>& children) {
  if (children.size() != static_cast<std::size_t>(model.O)) {
    throw std::invalid_argument("backup needs one child beta per observation (got " +
                                std::to_string(children.size()) + ", expected " + std::to_string(model.O) + ")");
  }
  Vec packed;
  packed.reserve(static_cast<std::size_t>(model.O) * model.S);
  for (const Vec& c : children) {
    if (c.size() != static_cast<std::size_t>(model.S)) throw std::invalid_argument("child beta has wrong length");
    packed.insert(packed.end(), c.begin(), c.end());
  }
  return packed;
}

void check_step(const TabularPomdp& model, int h) {
  if (h < 1 || h > model.H) throw StepRangeError("beta backup step " + std::to_string(h) + " outside 1..H");
}

}  // namespace

Vec backup_beta(const TabularPomdp& model, int h, int a, const std::vector<Vec>& children, double gamma) {
  check_step(model, h);
  const Vec packed = pack_children(model, children);
  Vec out(model.S, 0.0);
  backup_beta(model, h, a, packed, gamma, out);
  return out;
}

Vec backup_beta(const TabularPomdp& model, int h, std::span<const double> action_dist,
                const std::vector<std::vector<Vec>>& children, double gamma) {
  check_step(model, h);
  if (action_dist.size() != static_cast<std::size_t>(model.A) || children.size() != action_dist.size()) {
    throw std::invalid_argument("randomized backup needs a distribution and children for every action");
  }
  Vec out(model.S, 0.0);
  Vec part(model.S, 0.0);
  for (int a = 0; a < model.A; ++a) {
    if (action_dist[a] == 0.0) continue;
    const Vec packed = pack_children(model, children[a]);
    backup_beta(model, h, a, packed, gamma, part);
    for (int s = 0; s < model.S; ++s) out[s] += action_dist[a] * part[s];
  }
  return out;
}

Vec beta_by_definition(const TabularPomdp& model, const Policy& policy, const History& f, double gamma,
                       std::uint64_t cap) {
  check_risk_level(gamma, model.H);
  const int h = f.step();
  if (h > model.H + 1) throw StepRangeError("history " + f.key() + " is beyond step H+1");
  const int remaining = model.H + 1 - h;
  Vec beta(model.S, 0.0);
  if (remaining == 0) {
    std::fill(beta.begin(), beta.end(), 1.0);
    return beta;
  }
  const std::uint64_t obs_sequences = saturating_pow(static_cast<std::uint64_t>(model.O), remaining);
  const std::uint64_t hidden_paths = saturating_pow(static_cast<std::uint64_t>(model.S), remaining);
  require_within_cap("future continuations", obs_sequences * std::min<std::uint64_t>(hidden_paths, cap), cap);

  const double ref = 1.0 / model.O;
  const double sequence_weight = std::pow(ref, remaining);
  std::vector<int> obs(remaining), acts(remaining), hidden(remaining);
  for (std::uint64_t oc = 0; oc < obs_sequences; ++oc) {
    std::uint64_t c = oc;
    for (int t = remaining - 1; t >= 0; --t) {
      obs[t] = static_cast<int>(c % model.O);
      c /= model.O;
    }
    History g = f;
    for (int t = 0; t < remaining; ++t) {
      acts[t] = policy.action(g);
      g = g.child(acts[t], obs[t]);
    }
    // Conjugate belief for this continuation, summed over hidden paths
    // s_{h+1}..s_{H+1} for each starting state s_h.
    for (int start = 0; start < model.S; ++start) {
      double nu = 0.0;
      for (std::uint64_t hc = 0; hc < hidden_paths; ++hc) {
        std::uint64_t d = hc;
        for (int t = remaining - 1; t >= 0; --t) {
          hidden[t] = static_cast<int>(d % model.S);
          d /= model.S;
        }
        double w = 1.0;
        int prev = start;
        for (int t = 0; t < remaining && w != 0.0; ++t) {
          const int step = h + t;
          w *= std::exp(gamma * model.reward(step, prev, acts[t])) * model.transition(step, acts[t], prev, hidden[t]) *
               model.emission(step + 1, hidden[t], obs[t]) / ref;
          prev = hidden[t];
        }
        nu += w;
      }
      beta[start] += sequence_weight * nu;
    }
  }
  return beta;
}

HistoryTable policy_betas(const TabularPomdp& model, const Policy& policy, double gamma, std::uint64_t cap) {
  check_risk_level(gamma, model.H);
  HistoryTable table(model.A, model.O, model.H + 1, model.S, 1.0, cap);
  for (int h = model.H; h >= 1; --h) {
    const std::size_t n = table.count(h);
    for (std::size_t i = 0; i < n; ++i) {
      const int a = policy.action(h, i);
      const auto children = table.block(h + 1, child_index(i, model.A, model.O, a, 0), model.O);
      backup_beta(model, h, a, children, gamma, table.at(h, i));
    }
  }
  return table;
}

double value_from_representation(std::span<const double> sigma, std::span<const double> beta, double gamma) {
  const double inner = dot(sigma, beta);
  if (!(inner > 0.0)) throw UnreachableHistory("<sigma, beta> is not positive; history has probability zero");
  return std::log(inner) / gamma;
}

double value_from_representation(const RiskBelief& sigma, const BetaVector& beta, double gamma) {
  if (!(sigma.history == beta.history)) throw std::invalid_argument("belief and beta vector belong to different histories");
  return value_from_representation(sigma.vec, beta.vec, gamma);
}

double q_from_representation(std::span<const double> sigma_children, std::span<const double> beta_children, int S,
                             double gamma) {
  const std::size_t O = sigma_children.size() / static_cast<std::size_t>(S);
  const double inner = dot(sigma_children, beta_children) / static_cast<double>(O);
  if (!(inner > 0.0)) throw UnreachableHistory("all children have zero weight; history has probability zero");
  return std::log(inner) / gamma;
}

double q_from_representation(const std::vector<Vec>& sigma_children, const std::vector<Vec>& beta_children,
                             double gamma) {
  if (sigma_children.empty() || sigma_children.size() != beta_children.size()) {
    throw std::invalid_argument("need matching, nonempty sets of child beliefs and betas");
  }
  double total = 0.0;
  for (std::size_t o = 0; o < sigma_children.size(); ++o) total += dot(sigma_children[o], beta_children[o]);
  total /= static_cast<double>(sigma_children.size());
  if (!(total > 0.0)) throw UnreachableHistory("all children have zero weight; history has probability zero");
  return std::log(total) / gamma;
}

}  // namespace bvvi
