#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bvvi/belief.hpp"
#include "bvvi/beta.hpp"
#include "bvvi/measure.hpp"
#include "fixtures.hpp"
#include "random_models.hpp"

namespace bvvi {
namespace {

using testing::f1;

// E[sum r] by brute force over hidden and observed paths.
double expected_return(const TabularPomdp& m, const Policy& pi) {
  double total = 0.0;
  Trajectory path;
  auto walk = [&](auto&& self, int h) -> void {
    if (h > m.H) {
      total += trajectory_probability(m, pi, path) * trajectory_return(m, path);
      return;
    }
    History f;
    for (int t = 0; t + 1 < h; ++t) f = f.child(path.actions[t], path.observations[t]);
    const int a = pi.action(f);
    for (int next = 0; next < m.S; ++next) {
      for (int o = 0; o < m.O; ++o) {
        path.states.push_back(next);
        path.actions.push_back(a);
        path.observations.push_back(o);
        self(self, h + 1);
        path.states.pop_back();
        path.actions.pop_back();
        path.observations.pop_back();
      }
    }
  };
  for (int s = 0; s < m.S; ++s) {
    path.states = {s};
    walk(walk, 1);
  }
  return total;
}

TEST(BetaBounds, Examples) {
  auto [lo, hi] = beta_bounds(-0.5, 2, 1);
  EXPECT_NEAR(lo, std::exp(-1.0), 1e-15);
  EXPECT_EQ(hi, 1.0);
  std::tie(lo, hi) = beta_bounds(0.5, 2, 3);
  EXPECT_EQ(lo, 1.0);
  EXPECT_EQ(hi, 1.0);
  std::tie(lo, hi) = beta_bounds(1.0, 3, 2);
  EXPECT_EQ(lo, 1.0);
  EXPECT_NEAR(hi, std::exp(2.0), 1e-14);
}

TEST(BackupBeta, ScalarLastStep) {
  const TabularPomdp m = testing::scalar_chain(1, 0.5);
  const Vec beta = backup_beta(m, 1, 0, std::vector<Vec>{{1.0}}, 2.0);
  EXPECT_NEAR(beta[0], std::exp(1.0), 1e-15);
}

TEST(BackupBeta, F1LastStep) {
  const TabularPomdp m = f1();
  const Vec beta = backup_beta(m, 2, 1, std::vector<Vec>{{1.0, 1.0}, {1.0, 1.0}}, -0.5);
  EXPECT_NEAR(beta[0], 1.0, 1e-15);
  EXPECT_NEAR(beta[1], 0.60653, 5e-6);
}

TEST(BackupBeta, ChildCountMismatch) {
  EXPECT_THROW(backup_beta(f1(), 2, 1, std::vector<Vec>{{1.0, 1.0}}, -0.5), std::invalid_argument);
  EXPECT_THROW(backup_beta(f1(), 3, 1, std::vector<Vec>{{1.0, 1.0}, {1.0, 1.0}}, -0.5), StepRangeError);
}

TEST(BackupBeta, RandomizedIsMixture) {
  const TabularPomdp m = f1();
  const std::vector<Vec> c0{{1.0, 0.5}, {0.7, 0.9}}, c1{{0.2, 0.4}, {1.0, 1.0}};
  const Vec b0 = backup_beta(m, 1, 0, c0, 0.5), b1 = backup_beta(m, 1, 1, c1, 0.5);
  const double dist[] = {0.25, 0.75};
  const Vec mixed = backup_beta(m, 1, dist, {c0, c1}, 0.5);
  for (int s = 0; s < 2; ++s) EXPECT_NEAR(mixed[s], 0.25 * b0[s] + 0.75 * b1[s], 1e-15);
}

TEST(BetaByDefinition, TerminalIsOnes) {
  const TabularPomdp m = f1();
  EXPECT_EQ(beta_by_definition(m, Policy::constant(2, 2, 2, 0), History{}.child(0, 0).child(1, 1), 0.5),
            (Vec{1.0, 1.0}));
}

TEST(BetaByDefinition, MatchesRecursion) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const TabularPomdp m = testing::random_small_model(gen, 3, 3, trial % 3 == 0);
    if (history_count(m.A, m.O, m.H + 1) > 256) continue;
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    const double g = testing::random_gamma(gen);
    const HistoryTable betas = policy_betas(m, pi, g);
    for (int h = 1; h <= m.H + 1; ++h) {
      for (std::size_t i = 0; i < betas.count(h); ++i) {
        const Vec direct = beta_by_definition(m, pi, history_at(i, m.A, m.O, h), g);
        const auto rec = betas.at(h, i);
        for (int s = 0; s < m.S; ++s) EXPECT_NEAR(direct[s], rec[s], 1e-10 * std::max(1.0, rec[s]));
      }
    }
  }
}

TEST(PolicyBetas, WithinBounds) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    const TabularPomdp m = testing::random_small_model(gen);
    const double g = testing::random_gamma(gen);
    const HistoryTable betas = policy_betas(m, testing::random_policy(gen, m.A, m.O, m.H), g);
    for (int h = 1; h <= m.H + 1; ++h) {
      const auto [lo, hi] = beta_bounds(g, m.H, h);
      for (double x : betas.level(h)) {
        EXPECT_GE(x, lo * (1 - 1e-14));
        EXPECT_LE(x, hi * (1 + 1e-14));
      }
    }
  }
}

TEST(ValueFromRepresentation, Examples) {
  const Vec sigma{1.0, 0.0}, ones{1.0, 1.0};
  EXPECT_NEAR(value_from_representation(sigma, ones, 0.7), 0.0, 1e-15);
  const Vec scaled{std::exp(0.5), 0.0};
  EXPECT_NEAR(value_from_representation(scaled, ones, 0.5), 1.0, 1e-15);
  const Vec zero{0.0, 0.0};
  EXPECT_THROW(value_from_representation(zero, ones, 0.5), UnreachableHistory);
}

TEST(ValueFromRepresentation, HistoryMismatch) {
  const RiskBelief sigma{History{}, {1.0, 0.0}};
  const BetaVector beta{History{}.child(0, 0), {1.0, 1.0}};
  EXPECT_THROW(value_from_representation(sigma, beta, 0.5), std::invalid_argument);
}

TEST(ValueFromRepresentation, RootEqualsObjective) {
  const TabularPomdp m = f1();
  for (double g : {-1.0, -0.5, 0.5, 1.0}) {
    const Policy pi = Policy::constant(2, 2, 2, 1);
    const HistoryTable betas = policy_betas(m, pi, g);
    EXPECT_NEAR(value_from_representation(m.mu1, betas.at(1, 0), g), exact_objective(m, pi, g), 1e-12);
  }
  const HistoryTable betas = policy_betas(m, Policy::constant(2, 2, 2, 0), -0.5);
  EXPECT_NEAR(value_from_representation(m.mu1, betas.at(1, 0), -0.5), testing::kF1ConstantA0Objective, 1e-12);
}

TEST(ValueFromRepresentation, MatchesConditionalValueEverywhere) {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 25; ++trial) {
    const TabularPomdp m = testing::random_small_model(gen, 3, 3, trial % 2 == 0);
    if (history_count(m.A, m.O, m.H + 1) > 512) continue;
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    const double g = testing::random_gamma(gen);
    const HistoryTable sigmas = belief_table(m, g);
    const HistoryTable betas = policy_betas(m, pi, g);
    for (int h = 1; h <= m.H; ++h) {
      for (std::size_t i = 0; i < sigmas.count(h); ++i) {
        const History f = history_at(i, m.A, m.O, h);
        bool on_policy = true;
        History prefix;
        for (int t = 0; t + 1 < h && on_policy; ++t) {
          on_policy = pi.action(prefix) == f.actions[t];
          prefix = prefix.child(f.actions[t], f.observations[t]);
        }
        if (!on_policy) {
          EXPECT_THROW(conditional_value(m, pi, f, g), UnreachableHistory);
          continue;
        }
        if (dot(sigmas.at(h, i), betas.at(h, i)) <= 0.0) {
          EXPECT_THROW(conditional_value(m, pi, f, g), UnreachableHistory);
          continue;
        }
        const double rep = value_from_representation(sigmas.at(h, i), betas.at(h, i), g);
        const double direct = conditional_value(m, pi, f, g);
        EXPECT_NEAR(rep, direct, 1e-9 * std::max(1.0, std::abs(direct))) << f.key();
      }
    }
  }
}

TEST(QFromRepresentation, Examples) {
  const std::vector<Vec> sigma{{0.5, 0.0}, {0.5, 0.0}}, beta{{1.0, 1.0}, {1.0, 1.0}};
  EXPECT_NEAR(q_from_representation(sigma, beta, 1.0), std::log(0.5), 1e-15);
  const std::vector<Vec> zero{{0.0, 0.0}, {0.0, 0.0}};
  EXPECT_THROW(q_from_representation(zero, beta, 1.0), UnreachableHistory);
  EXPECT_THROW(q_from_representation(sigma, std::vector<Vec>{{1.0, 1.0}}, 1.0), std::invalid_argument);
}

TEST(QFromRepresentation, ValueOfGreedyChild) {
  // For a deterministic policy, V_h(f) = Q_h(f, pi(f)) in representation form.
  const TabularPomdp m = f1();
  const double g = 0.5;
  const Policy pi = Policy::constant(2, 2, 2, 1);
  const HistoryTable sigmas = belief_table(m, g);
  const HistoryTable betas = policy_betas(m, pi, g);
  const std::size_t first = child_index(0, 2, 2, 1, 0);
  const double q = q_from_representation(sigmas.block(2, first, 2), betas.block(2, first, 2), 2, g);
  EXPECT_NEAR(q, value_from_representation(sigmas.at(1, 0), betas.at(1, 0), g), 1e-13);
}

TEST(Degeneracy, SmallGammaApproachesExpectation) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 10; ++trial) {
    const TabularPomdp m = testing::random_small_model(gen, 2, 3);
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    const HistoryTable betas = policy_betas(m, pi, 1e-6);
    const double v = value_from_representation(m.mu1, betas.at(1, 0), 1e-6);
    EXPECT_LE(std::abs(v - expected_return(m, pi)), 3 * m.H * 1e-6);
  }
}

}  // namespace
}  // namespace bvvi
