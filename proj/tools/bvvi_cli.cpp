#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bvvi/harness.hpp"
#include "bvvi/learner.hpp"
#include "bvvi/measure.hpp"
#include "bvvi/model_io.hpp"
#include "bvvi/oracle.hpp"

namespace {

using namespace bvvi;

struct Flags {
  std::string model;
  std::string policy;
  double gamma = -0.5;
  double delta = 0.1;
  int episodes = 1;
  std::string seeds = "0";
  std::string out;
  std::uint64_t history_cap = kDefaultHistoryCap;
  std::uint64_t policy_cap = kDefaultPolicyCap;
  bool exact = false;
  bool no_bonus = false;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    std::uint64_t value = 0;
    try {
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || item.front() == '-') {
      throw CLI::ValidationError("--seed", "'" + item + "' is not a nonnegative integer");
    }
    seeds.push_back(value);
  }
  if (seeds.empty()) throw CLI::ValidationError("--seed", "at least one seed is required");
  return seeds;
}

ExperimentConfig make_config(const Flags& f, CLI::App* sub) {
  ExperimentConfig cfg;
  cfg.model_path = f.model;
  cfg.gamma = f.gamma;
  cfg.delta = f.delta;
  cfg.episodes = f.episodes;
  cfg.seeds = parse_seeds(f.seeds);
  cfg.out = f.out;
  apply_cap_override(cfg.history_cap, cfg.policy_cap);
  if (sub->count("--history-cap") > 0) cfg.history_cap = f.history_cap;
  if (sub->count("--policy-cap") > 0) cfg.policy_cap = f.policy_cap;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + path + " for writing");
  file << text;
  if (!file) throw std::runtime_error("failed writing " + path);
}

int cmd_run(const Flags& f, CLI::App* sub) {
  const ExperimentConfig cfg = make_config(f, sub);
  const TabularPomdp model = load_model(cfg.model_path);
  const RiskParams params =
      RiskParams::make(cfg.gamma, cfg.delta, cfg.episodes, model.S, model.O, model.A, model.H);
  const bool multiple = cfg.seeds.size() > 1;
  if (multiple && cfg.out.empty()) throw CLI::ValidationError("--out", "required when several seeds are given");
  const auto runs =
      run_seed_sweep(model, cfg.episodes, params, cfg.seeds, RegretOptions{cfg.history_cap, cfg.policy_cap});
  for (const SeedRun& run : runs) {
    const std::string path = cfg.out.empty() ? "" : seed_output_path(cfg.out, run.seed, multiple).string();
    write_text(path, regret_csv(run.curve));
    if (!path.empty()) {
      std::cerr << "seed " << run.seed << ": cumulative regret " << format_double(run.curve.rows.back().cumulative)
                << " -> " << path << "\n";
    }
  }
  return 0;
}

int cmd_plan(const Flags& f, CLI::App* sub) {
  const ExperimentConfig cfg = make_config(f, sub);
  const TabularPomdp model = load_model(cfg.model_path);
  PlanResult planned;
  if (f.exact) {
    if (!f.no_bonus) throw CLI::ValidationError("--exact", "planning on the true model requires --no-bonus");
    planned = plan_on_model(model, cfg.gamma, nullptr, cfg.history_cap);
  } else {
    // The policy the learner plays in episode --episodes: the empirical model
    // after the first episodes-1 hindsight updates.
    if (cfg.seeds.size() != 1) throw CLI::ValidationError("--seed", "plan takes a single seed");
    const RiskParams params =
        RiskParams::make(cfg.gamma, cfg.delta, cfg.episodes, model.S, model.O, model.A, model.H);
    EmpiricalModel emp = init_empirical(model.S, model.O, model.A, model.H, model.reward_table);
    if (cfg.episodes > 1) {
      const RunLog log = run_learning(model, cfg.episodes - 1, params, cfg.seeds.front(),
                                      LearningOptions{cfg.history_cap, !f.no_bonus});
      for (const RunEntry& e : log.entries) emp = update_empirical(emp, e.episode);
    }
    planned = plan(emp, params, PlanOptions{!f.no_bonus, cfg.history_cap});
  }
  write_text(cfg.out, dump_policy(planned.policy) + "\n");
  std::cerr << "V1 " << format_double(planned.v1) << "\n";
  return 0;
}

int cmd_oracle(const Flags& f, CLI::App* sub) {
  const ExperimentConfig cfg = make_config(f, sub);
  const TabularPomdp model = load_model(cfg.model_path);
  const OracleResult dp = optimal_by_dp(model, cfg.gamma, cfg.history_cap);
  const double value = optimal_value(model, cfg.gamma, RegretOptions{cfg.history_cap, cfg.policy_cap});
  std::cout << "J* " << format_double(value) << "\n";
  if (!cfg.out.empty()) save_policy(dp.policy, cfg.out);
  else std::cout << dump_policy(dp.policy) << "\n";
  return 0;
}

int cmd_eval(const Flags& f, CLI::App* sub) {
  const ExperimentConfig cfg = make_config(f, sub);
  const TabularPomdp model = load_model(cfg.model_path);
  const Policy policy = load_policy(f.policy, model.A, model.O, model.H);
  std::cout << "J " << format_double(evaluate_policy(model, policy, cfg.gamma, cfg.history_cap)) << "\n";
  return 0;
}

int cmd_bound(const Flags& f, CLI::App* sub) {
  const ExperimentConfig cfg = make_config(f, sub);
  const TabularPomdp model = load_model(cfg.model_path);
  const BoundParams bp = BoundParams::from_model(model, cfg.episodes, cfg.gamma, cfg.delta);
  std::ostringstream out;
  out << "episode,bound\n";
  for (int k = 1; k <= cfg.episodes; ++k) out << k << ',' << format_double(theoretical_bound(bp, k, cfg.episodes)) << '\n';
  write_text(cfg.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive POMDP learner: beta vector value iteration"};
  app.require_subcommand(1);
  Flags flags;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--model", flags.model, "Model JSON file")->required()->check(CLI::ExistingFile);
    sub->add_option("--gamma", flags.gamma, "Risk level (nonzero)")->capture_default_str();
    sub->add_option("--delta", flags.delta, "Confidence parameter in (0,1)")->capture_default_str();
    sub->add_option("--episodes", flags.episodes, "Episode count K")->capture_default_str();
    sub->add_option("--seed", flags.seeds, "Seed or comma-separated seed list")->capture_default_str();
    sub->add_option("--out", flags.out, "Output path (stdout when omitted)");
    sub->add_option("--history-cap", flags.history_cap, "Maximum number of histories per step");
    sub->add_option("--policy-cap", flags.policy_cap, "Maximum policy-space size for enumeration");
    sub->add_flag("--exact", flags.exact, "Plan on the true model");
    sub->add_flag("--no-bonus", flags.no_bonus, "Disable exploration bonuses");
  };

  CLI::App* run = app.add_subcommand("run", "Learn for K episodes and write the regret CSV");
  CLI::App* plan_cmd = app.add_subcommand("plan", "Plan once and write a policy file");
  CLI::App* oracle = app.add_subcommand("oracle", "Print J* and the optimal policy");
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a policy file exactly");
  CLI::App* bound = app.add_subcommand("bound", "Print the regret bound for k = 1..K");
  for (CLI::App* sub : {run, plan_cmd, oracle, eval, bound}) common(sub);
  eval->add_option("--policy", flags.policy, "Policy JSON file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(flags, run);
    if (*plan_cmd) return cmd_plan(flags, plan_cmd);
    if (*oracle) return cmd_oracle(flags, oracle);
    if (*eval) return cmd_eval(flags, eval);
    if (*bound) return cmd_bound(flags, bound);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
