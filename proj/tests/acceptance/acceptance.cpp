// Acceptance suite. Prints one PASS/FAIL line per criterion; exit status is
// nonzero when any selected criterion fails.
//
//   bvvi_acceptance            run every criterion
//   bvvi_acceptance 3 7        run criteria 3 and 7

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bvvi/belief.hpp"
#include "bvvi/beta.hpp"
#include "bvvi/harness.hpp"
#include "bvvi/learner.hpp"
#include "bvvi/measure.hpp"
#include "bvvi/oracle.hpp"
#include "fixtures.hpp"
#include "random_models.hpp"

namespace {

using namespace bvvi;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

bool on_policy(const Policy& pi, const History& f) {
  History prefix;
  for (std::size_t t = 0; t < f.actions.size(); ++t) {
    if (pi.action(prefix) != f.actions[t]) return false;
    prefix = prefix.child(f.actions[t], f.observations[t]);
  }
  return true;
}

// Shared across criteria: every PlanResult produced anywhere in the run is
// checked against the admissible beta range.
struct ClipAudit {
  std::uint64_t vectors = 0;
  std::uint64_t violations = 0;

  void check(const PlanResult& r, double gamma, int H) {
    for (int h = 1; h <= H + 1; ++h) {
      const auto [lo, hi] = beta_bounds(gamma, H, h);
      for (double x : r.betas.level(h)) {
        if (x < lo - 1e-15 || x > hi + 1e-15 || !std::isfinite(x)) ++violations;
      }
      vectors += r.betas.count(h);
    }
  }
};

ClipAudit g_audit;

// Plan -> play -> reveal -> update, mirroring run_learning, while keeping each
// PlanResult for inspection.
template <typename Visit>
void learn_with_plans(const TabularPomdp& model, int K, const RiskParams& params, std::uint64_t seed, Visit visit) {
  EmpiricalModel emp = init_empirical(model.S, model.O, model.A, model.H, model.reward_table);
  for (int k = 1; k <= K; ++k) {
    const PlanResult planned = plan(emp, params);
    g_audit.check(planned, params.gamma, model.H);
    visit(k, planned);
    CounterRng rng(seed, static_cast<std::uint64_t>(k));
    emp = update_empirical(emp, sample_episode(model, planned.policy, rng));
  }
}

Outcome representation_theorem() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1001);
  double worst = 0.0;
  std::size_t histories = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const TabularPomdp m = testing::random_small_model(gen, 3, 3, instance % 4 == 3);
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    const double g = testing::random_gamma(gen);
    const HistoryTable sigmas = belief_table(m, g);
    const HistoryTable betas = policy_betas(m, pi, g);
    for (int h = 1; h <= m.H; ++h) {
      for (std::size_t i = 0; i < sigmas.count(h); ++i) {
        const History f = history_at(i, m.A, m.O, h);
        if (!on_policy(pi, f) || !(dot(sigmas.at(h, i), betas.at(h, i)) > 0.0)) continue;
        const double rep = value_from_representation(sigmas.at(h, i), betas.at(h, i), g);
        const double direct = conditional_value(m, pi, f, g);
        worst = std::max(worst, rel_err(rep, direct));
        ++histories;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 60.0, std::to_string(histories) + " reachable histories, max rel err " +
                                               fmt("%.3g", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome conjugacy_invariance() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1002);
  double worst = 0.0;
  for (int draw = 0; draw < 200; ++draw) {
    const TabularPomdp m = testing::random_small_model(gen, 3, 4, draw % 4 == 3);
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    const double g = testing::random_gamma(gen);
    CounterRng rng(1002, static_cast<std::uint64_t>(draw));
    const EpisodeRecord rec = sample_episode(m, pi, rng);
    const Vec trace = inner_product_trace(m, pi, rec.actions, rec.observations, g);
    for (double x : trace) worst = std::max(worst, std::abs(x - trace.front()) / std::abs(trace.front()));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && elapsed < 10.0,
          "200 draws, max rel spread " + fmt("%.3g", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome change_of_measure() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1003);
  double worst = 0.0;
  for (int instance = 0; instance < 100; ++instance) {
    const TabularPomdp m = testing::random_small_model(gen, 3, 3, instance % 4 == 3);
    const Policy pi = testing::random_policy(gen, m.A, m.O, m.H);
    // A random bounded function of the whole trajectory.
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const double cs = coef(gen), ca = coef(gen), co = coef(gen), cr = coef(gen);
    const TrajectoryFunction f = [&](const Trajectory& path) {
      double v = cr * trajectory_return(m, path);
      for (std::size_t t = 0; t < path.states.size(); ++t) v += cs * path.states[t] * (t + 1);
      for (std::size_t t = 0; t < path.actions.size(); ++t) v += ca * path.actions[t] + co * path.observations[t] * t;
      return std::sin(v);
    };
    const auto [lhs, rhs] = change_of_measure_expectation(m, ReferenceModel::uniform(m.O), pi, f);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-12 && elapsed < 30.0,
          "100 instances, max abs err " + fmt("%.3g", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome planner_matches_enumeration() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1004);
  double worst = 0.0;
  std::uint64_t largest = 0;
  for (int instance = 0; instance < 50; ++instance) {
    const TabularPomdp m = testing::random_enumerable_model(gen, 1u << 20);
    const double g = testing::random_gamma(gen);
    const PlanResult planned = plan_on_model(m, g, nullptr);
    g_audit.check(planned, g, m.H);
    const double brute = optimal_by_enumeration(m, g, 1u << 20).value;
    worst = std::max({worst, rel_err(planned.v1, brute), rel_err(exact_objective(m, planned.policy, g), brute)});
    largest = std::max(largest, policy_space_size(m.A, m.O, m.H));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 120.0, "50 instances (largest policy space " + std::to_string(largest) +
                                                "), max rel err " + fmt("%.3g", worst) + ", " +
                                                fmt("%.2f", elapsed) + " s"};
}

Outcome beta_clipping() {
  std::mt19937_64 gen(1005);
  for (int instance = 0; instance < 30; ++instance) {
    const TabularPomdp m = testing::random_small_model(gen);
    const double g = testing::random_gamma(gen);
    const int K = 25;
    learn_with_plans(m, K, RiskParams::make(g, 0.1, K, m.S, m.O, m.A, m.H), instance, [](int, const PlanResult&) {});
    g_audit.check(plan_on_model(m, g, nullptr), g, m.H);
  }
  const TabularPomdp f1 = testing::f1();
  for (double g : {-1.0, -0.5, 0.5, 1.0}) {
    learn_with_plans(f1, 50, RiskParams::make(g, 0.1, 50, 2, 2, 2, 2), 5, [](int, const PlanResult&) {});
  }
  return {g_audit.violations == 0 && g_audit.vectors > 0,
          std::to_string(g_audit.violations) + " violations over " + std::to_string(g_audit.vectors) +
              " beta vectors from every planner run so far"};
}

Outcome risk_neutral_degeneracy() {
  const auto start = Clock::now();
  std::mt19937_64 gen(1006);
  double worst = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const TabularPomdp m = testing::random_small_model(gen);
    const double baseline = risk_neutral_alpha_vi(m).value;
    for (double g : {1e-6, -1e-6}) {
      const PlanResult planned = plan_on_model(m, g, nullptr);
      g_audit.check(planned, g, m.H);
      worst = std::max(worst, std::abs(planned.v1 - baseline));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-4 && elapsed < 60.0,
          "20 instances, max |J*(+-1e-6) - V*_rn| " + fmt("%.3g", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome optimism() {
  const TabularPomdp f1 = testing::f1();
  const int K = 200;
  bool pass = true;
  std::string detail;
  for (double g : {-1.0, -0.5, 0.5, 1.0}) {
    const double optimal = optimal_value(f1, g);
    const RiskParams params = RiskParams::make(g, 0.1, K, 2, 2, 2, 2);
    int optimistic = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      learn_with_plans(f1, K, params, seed, [&](int, const PlanResult& r) {
        optimistic += r.v1 >= optimal - 1e-9;
        ++total;
      });
    }
    const double fraction = static_cast<double>(optimistic) / total;
    pass = pass && fraction >= 0.90;
    detail += (detail.empty() ? "" : ", ") + std::string("gamma=") + fmt("%g", g) + ": " + fmt("%.4f", fraction);
  }
  return {pass, detail};
}

Outcome regret_decay() {
  const auto start = Clock::now();
  const TabularPomdp f1 = testing::f1();
  const int K = 500;
  const double gamma = -0.5;
  const RiskParams params = RiskParams::make(gamma, 0.1, K, 2, 2, 2, 2);
  std::vector<std::uint64_t> seeds(10);
  std::iota(seeds.begin(), seeds.end(), 0);
  const std::vector<SeedRun> runs = run_seed_sweep(f1, K, params, seeds);
  const double bound = theoretical_bound(BoundParams::from_model(f1, K, gamma, 0.1), K);
  double early = 0.0, late = 0.0, worst_cum = 0.0, average = 0.0;
  bool under_bound = true;
  for (const SeedRun& run : runs) {
    for (int k = 1; k <= 50; ++k) early += run.curve.rows[k - 1].regret;
    for (int k = 451; k <= 500; ++k) late += run.curve.rows[k - 1].regret;
    const double cum = run.curve.rows.back().cumulative;
    worst_cum = std::max(worst_cum, cum);
    under_bound = under_bound && cum <= bound;
    average += cum / K;
  }
  early /= 50.0 * runs.size();
  late /= 50.0 * runs.size();
  average /= runs.size();
  const double elapsed = seconds_since(start);
  const bool decay = late <= 0.5 * early;
  return {decay && under_bound && elapsed < 600.0,
          "early mean " + fmt("%.6f", early) + ", late mean " + fmt("%.6f", late) + " (ratio " +
              fmt("%.4f", early > 0 ? late / early : INFINITY) + ", need <= 0.5); worst cumulative " +
              fmt("%.3f", worst_cum) + " vs bound " + fmt("%.1f", bound) + "; average regret " + fmt("%.4f", average) +
              " (epsilon 0.05 " + (average <= 0.05 ? "met" : "not met") + "); " + fmt("%.2f", elapsed) + " s"};
}

Outcome determinism() {
  const TabularPomdp f1 = testing::f1();
  const RiskParams params = RiskParams::make(-0.5, 0.1, 60, 2, 2, 2, 2);
  auto produce = [&](const std::string& name) {
    std::ofstream out(name, std::ios::binary);
    write_regret_csv(measure_regret(f1, run_learning(f1, 60, params, 42), params), out);
    out.close();
    std::ifstream in(name, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::string a = produce("acceptance_determinism_a.csv");
  const std::string b = produce("acceptance_determinism_b.csv");
  const auto sweep1 = run_seed_sweep(f1, 30, params, {3, 4, 5}, {}, true);
  const auto sweep2 = run_seed_sweep(f1, 30, params, {3, 4, 5}, {}, true);
  bool sweeps_equal = true;
  for (std::size_t i = 0; i < sweep1.size(); ++i) sweeps_equal &= regret_csv(sweep1[i].curve) == regret_csv(sweep2[i].curve);
  std::remove("acceptance_determinism_a.csv");
  std::remove("acceptance_determinism_b.csv");
  return {!a.empty() && a == b && sweeps_equal,
          std::to_string(a.size()) + " bytes per CSV, files " + (a == b ? "identical" : "differ") +
              ", parallel seed sweeps " + (sweeps_equal ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "representation theorem", representation_theorem},
      {2, "conjugacy invariance", conjugacy_invariance},
      {3, "change of measure", change_of_measure},
      {4, "planner equals brute force", planner_matches_enumeration},
      {5, "beta bounds and clipping", beta_clipping},
      {6, "risk-neutral degeneracy", risk_neutral_degeneracy},
      {7, "optimism", optimism},
      {8, "regret decay", regret_decay},
      {9, "determinism", determinism},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoi(argv[i]));
  if (selected.empty()) {
    for (const auto& c : criteria) selected.push_back(c.id);
  }
  // Clipping audits every planner run, so when it is selected together with
  // others it goes last.
  std::stable_partition(selected.begin(), selected.end(), [](int id) { return id != 5; });

  int failures = 0;
  for (int id : selected) {
    const auto it = std::find_if(criteria.begin(), criteria.end(), [&](const Criterion& c) { return c.id == id; });
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    Outcome outcome;
    try {
      outcome = it->run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("AC%d %-28s %s  %s\n", id, it->name, outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
