#include "bvvi/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bvvi/belief.hpp"
#include "bvvi/beta.hpp"
#include "bvvi/measure.hpp"

namespace bvvi {

namespace {

void fill_uniform(Vec& table, std::size_t width) {
  std::fill(table.begin(), table.end(), 1.0 / static_cast<double>(width));
}

// Row-wise ratio counts / (N v 1), falling back to uniform when N = 0.
void normalize_rows(const std::vector<std::uint64_t>& counts, std::size_t width, Vec& out) {
  for (std::size_t row = 0; row < counts.size() / width; ++row) {
    std::uint64_t n = 0;
    for (std::size_t j = 0; j < width; ++j) n += counts[row * width + j];
    for (std::size_t j = 0; j < width; ++j) {
      out[row * width + j] = n == 0 ? 1.0 / static_cast<double>(width)
                                    : static_cast<double>(counts[row * width + j]) / static_cast<double>(n);
    }
  }
}

}  // namespace

EmpiricalModel init_empirical(int S, int O, int A, int H, const Vec& reward) {
  EmpiricalModel emp;
  emp.estimate = TabularPomdp::zeros(S, O, A, H);
  fill_uniform(emp.estimate.mu1, S);
  fill_uniform(emp.estimate.trans_table, S);
  fill_uniform(emp.estimate.emit_table, O);
  if (!reward.empty()) {
    if (reward.size() != emp.estimate.reward_table.size()) throw std::invalid_argument("reward table has wrong size");
    emp.estimate.reward_table = reward;
  }
  const auto s = static_cast<std::size_t>(S), o = static_cast<std::size_t>(O);
  const auto a = static_cast<std::size_t>(A), h = static_cast<std::size_t>(H);
  emp.initial_counts.assign(s, 0);
  emp.state_action_counts.assign(h * s * a, 0);
  emp.state_counts.assign((h + 1) * s, 0);
  emp.transition_counts.assign(h * a * s * s, 0);
  emp.emission_counts.assign(h * s * o, 0);
  return emp;
}

EmpiricalModel update_empirical(const EmpiricalModel& emp, const EpisodeRecord& rec) {
  const int S = emp.S(), O = emp.O(), A = emp.A(), H = emp.H();
  if (!rec.hindsight_revealed()) throw MissingHindsight("episode record has no revealed hidden states");
  if (rec.states.size() != static_cast<std::size_t>(H) + 1 || rec.actions.size() != static_cast<std::size_t>(H) ||
      rec.observations.size() != static_cast<std::size_t>(H)) {
    throw std::invalid_argument("episode record lengths do not match the horizon");
  }
  EmpiricalModel out = emp;
  out.episodes += 1;
  out.initial_counts[rec.states[0]] += 1;
  for (int h = 1; h <= H + 1; ++h) {
    out.state_counts[static_cast<std::size_t>(h - 1) * S + rec.states[h - 1]] += 1;
  }
  for (int h = 1; h <= H; ++h) {
    const int s = rec.states[h - 1], a = rec.actions[h - 1], next = rec.states[h];
    out.state_action_counts[(static_cast<std::size_t>(h - 1) * S + s) * A + a] += 1;
    out.transition_counts[out.estimate.trans_offset(h, a, s) + next] += 1;
    out.emission_counts[out.estimate.emit_offset(h + 1, next) + rec.observations[h - 1]] += 1;
  }
  normalize_rows(out.initial_counts, S, out.estimate.mu1);
  normalize_rows(out.transition_counts, S, out.estimate.trans_table);
  normalize_rows(out.emission_counts, O, out.estimate.emit_table);
  return out;
}

Residues residues(const EmpiricalModel& emp, const RiskParams& params) {
  const int S = emp.S(), O = emp.O(), A = emp.A(), H = emp.H();
  Residues res;
  res.S = S;
  res.A = A;
  res.transition.assign(static_cast<std::size_t>(H) * S * A, 0.0);
  res.emission.assign(static_cast<std::size_t>(H) * S, 0.0);
  const double t_scale = static_cast<double>(S) * H * params.iota;
  const double o_scale = static_cast<double>(O) * H * params.iota;
  for (int h = 1; h <= H; ++h) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        const double n = static_cast<double>(std::max<std::uint64_t>(emp.count_sa(h, s, a), 1));
        res.transition[(static_cast<std::size_t>(h - 1) * S + s) * A + a] =
            std::min(1.0, 3.0 * std::sqrt(t_scale / n));
      }
    }
  }
  for (int step = 2; step <= H + 1; ++step) {
    for (int s = 0; s < S; ++s) {
      const double n = static_cast<double>(std::max<std::uint64_t>(emp.count_s(step, s), 1));
      res.emission[static_cast<std::size_t>(step - 2) * S + s] = std::min(1.0, 3.0 * std::sqrt(o_scale / n));
    }
  }
  return res;
}

double bonus(const EmpiricalModel& emp, const Residues& res, int h, int s, int a, double gamma) {
  const int H = emp.H();
  const double magnitude = std::abs(std::expm1(gamma * (H - h + 1)));
  const auto row = emp.estimate.trans_row(h, a, s);
  double spread = res.t(h, s, a);
  for (int next = 0; next < emp.S(); ++next) spread += row[next] * res.o(h + 1, next);
  return magnitude * std::min(1.0, spread);
}

BonusTable bonus_table(const EmpiricalModel& emp, const RiskParams& params) {
  BonusTable table;
  table.residues = residues(emp, params);
  table.params = params;
  table.S = emp.S();
  table.A = emp.A();
  table.values.assign(static_cast<std::size_t>(emp.H()) * emp.S() * emp.A(), 0.0);
  for (int h = 1; h <= emp.H(); ++h) {
    for (int s = 0; s < emp.S(); ++s) {
      for (int a = 0; a < emp.A(); ++a) {
        table.values[(static_cast<std::size_t>(h - 1) * emp.S() + s) * emp.A() + a] =
            bonus(emp, table.residues, h, s, a, params.gamma);
      }
    }
  }
  return table;
}

PlanResult plan_on_model(const TabularPomdp& model, double gamma, const BonusTable* bonuses,
                         std::uint64_t history_cap) {
  check_risk_level(gamma, model.H);
  const int S = model.S, O = model.O, A = model.A, H = model.H;

  PlanResult result;
  result.beliefs = belief_table(model, gamma, history_cap);
  result.betas = HistoryTable(A, O, H + 1, S, 1.0, history_cap);
  result.values.q = HistoryTable(A, O, H, A, std::numeric_limits<double>::quiet_NaN(), history_cap);
  result.values.v = HistoryTable(A, O, H, 1, std::numeric_limits<double>::quiet_NaN(), history_cap);
  result.policy = Policy(A, O, H, history_cap);

  const double sign = gamma > 0.0 ? 1.0 : -1.0;
  for (int h = H; h >= 1; --h) {
    const auto [lo, hi] = beta_bounds(gamma, H, h);
    const std::size_t n = result.beliefs.count(h);
    for (std::size_t i = 0; i < n; ++i) {
      const auto sigma = result.beliefs.at(h, i);
      const bool reachable = std::any_of(sigma.begin(), sigma.end(), [](double x) { return x != 0.0; });
      int greedy = 0;
      if (reachable) {
        auto q = result.values.q.at(h, i);
        for (int a = 0; a < A; ++a) {
          const std::size_t first = child_index(i, A, O, a, 0);
          q[a] = q_from_representation(result.beliefs.block(h + 1, first, O), result.betas.block(h + 1, first, O), S,
                                       gamma);
          if (q[a] > q[greedy]) greedy = a;
        }
        result.values.v.at(h, i)[0] = q[greedy];
      }
      // Zero-belief histories keep action 0; their betas are still backed up
      // so every stored vector is defined and in range.
      result.policy.set(h, i, greedy);
      auto beta = result.betas.at(h, i);
      backup_beta(model, h, greedy, result.betas.block(h + 1, child_index(i, A, O, greedy, 0), O), gamma, beta);
      for (int s = 0; s < S; ++s) {
        if (bonuses) beta[s] += sign * bonuses->at(h, s, greedy);
        beta[s] = std::clamp(beta[s], lo, hi);
      }
    }
  }
  result.v1 = result.values.v.at(1, 0)[0];
  return result;
}

PlanResult plan(const EmpiricalModel& emp, const RiskParams& params, const PlanOptions& options) {
  if (!options.use_bonus) return plan_on_model(emp.estimate, params.gamma, nullptr, options.history_cap);
  const BonusTable bonuses = bonus_table(emp, params);
  return plan_on_model(emp.estimate, params.gamma, &bonuses, options.history_cap);
}

RunLog run_learning(const TabularPomdp& model, int K, const RiskParams& params, std::uint64_t seed,
                    const LearningOptions& options) {
  if (K < 1) throw std::invalid_argument("episode count K must be >= 1");
  const ValidationReport report = validate_model(model);
  if (!report.ok()) throw ValidationError(report.to_string());
  check_risk_level(params.gamma, model.H);
  require_within_cap("histories at step " + std::to_string(model.H + 1), history_count(model.A, model.O, model.H + 1),
                     options.history_cap);

  EmpiricalModel emp = init_empirical(model.S, model.O, model.A, model.H, model.reward_table);
  RunLog log;
  log.entries.reserve(K);
  for (int k = 1; k <= K; ++k) {
    PlanResult planned = plan(emp, params, PlanOptions{options.use_bonus, options.history_cap});
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    EpisodeRecord rec = sample_episode(model, planned.policy, rng);
    emp = update_empirical(emp, rec);
    log.entries.push_back(RunEntry{std::move(planned.policy), std::move(rec), planned.v1});
  }
  return log;
}

}  // namespace bvvi
