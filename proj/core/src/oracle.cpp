#include "bvvi/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "bvvi/history_table.hpp"
#include "bvvi/learner.hpp"
#include "bvvi/measure.hpp"

namespace bvvi {

std::uint64_t policy_space_size(int A, int O, int H) {
  std::uint64_t decision_points = 0;
  for (int h = 1; h <= H; ++h) {
    const std::uint64_t n = history_count(A, O, h);
    if (n == UINT64_MAX || decision_points + n < decision_points) return UINT64_MAX;
    decision_points += n;
  }
  return saturating_pow(static_cast<std::uint64_t>(A), decision_points);
}

PolicySpaceIterator::PolicySpaceIterator(int A, int O, int H, std::uint64_t cap)
    : size_(policy_space_size(A, O, H)) {
  require_within_cap("deterministic policy space", size_, cap);
  current_ = Policy(A, O, H);
}

bool PolicySpaceIterator::next() {
  if (done_) return false;
  auto digits = current_.flat();
  for (std::size_t i = digits.size(); i-- > 0;) {
    if (digits[i] + 1 < current_.A()) {
      ++digits[i];
      return true;
    }
    digits[i] = 0;
  }
  done_ = true;
  return false;
}

OracleResult optimal_by_enumeration(const TabularPomdp& model, double gamma, std::uint64_t cap) {
  check_risk_level(gamma, model.H);
  PolicySpaceIterator it(model.A, model.O, model.H, cap);
  OracleResult best{exact_objective(model, it.current(), gamma, UINT64_MAX), it.current()};
  while (it.next()) {
    const double j = exact_objective(model, it.current(), gamma, UINT64_MAX);
    // Values equal up to summation-order rounding count as ties.
    if (j > best.value + 1e-12 * std::max(1.0, std::abs(best.value))) {
      best.value = j;
      best.policy = it.current();
    }
  }
  return best;
}

OracleResult optimal_by_dp(const TabularPomdp& model, double gamma, std::uint64_t cap) {
  PlanResult planned = plan_on_model(model, gamma, nullptr, cap);
  return OracleResult{planned.v1, std::move(planned.policy)};
}

OracleResult risk_neutral_alpha_vi(const TabularPomdp& model, std::uint64_t cap) {
  const int S = model.S, O = model.O, A = model.A, H = model.H;
  // Normalized beliefs forward; all-zero rows mark unreachable histories.
  HistoryTable belief(A, O, H + 1, S, 0.0, cap);
  std::copy(model.mu1.begin(), model.mu1.end(), belief.at(1, 0).begin());
  for (int h = 1; h <= H; ++h) {
    for (std::size_t i = 0; i < belief.count(h); ++i) {
      const auto b = belief.at(h, i);
      for (int a = 0; a < A; ++a) {
        for (int o = 0; o < O; ++o) {
          auto child = belief.at(h + 1, child_index(i, A, O, a, o));
          double total = 0.0;
          for (int next = 0; next < S; ++next) {
            double acc = 0.0;
            for (int s = 0; s < S; ++s) acc += model.transition(h, a, s, next) * b[s];
            child[next] = model.emission(h + 1, next, o) * acc;
            total += child[next];
          }
          if (total > 0.0) {
            for (double& x : child) x /= total;
          }
        }
      }
    }
  }

  HistoryTable alpha(A, O, H + 1, S, 0.0, cap);
  Policy policy(A, O, H, cap);
  Vec candidate(S);
  for (int h = H; h >= 1; --h) {
    for (std::size_t i = 0; i < alpha.count(h); ++i) {
      const auto b = belief.at(h, i);
      double best = -INFINITY;
      int best_a = 0;
      auto out = alpha.at(h, i);
      for (int a = 0; a < A; ++a) {
        for (int s = 0; s < S; ++s) {
          double future = 0.0;
          for (int next = 0; next < S; ++next) {
            double w = 0.0;
            for (int o = 0; o < O; ++o) {
              w += model.emission(h + 1, next, o) * alpha.at(h + 1, child_index(i, A, O, a, o))[next];
            }
            future += model.transition(h, a, s, next) * w;
          }
          candidate[s] = model.reward(h, s, a) + future;
        }
        const double value = dot(b, candidate);
        if (value > best) {
          best = value;
          best_a = a;
          std::copy(candidate.begin(), candidate.end(), out.begin());
        }
      }
      policy.set(h, i, best_a);
    }
  }
  return OracleResult{dot(model.mu1, alpha.at(1, 0)), std::move(policy)};
}

double evaluate_policy(const TabularPomdp& model, const Policy& policy, double gamma, std::uint64_t cap) {
  return exact_objective(model, policy, gamma, cap);
}

}  // namespace bvvi
