#include "bvvi/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <future>
#include <sstream>
#include <stdexcept>

#include "bvvi/measure.hpp"
#include "bvvi/oracle.hpp"

namespace bvvi {

void ExperimentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("--episodes must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("--delta must lie in (0,1)");
  if (gamma == 0.0 || !std::isfinite(gamma)) throw NumericRangeError("--gamma must be finite and nonzero");
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
}

void apply_cap_override(std::uint64_t& history_cap, std::uint64_t& policy_cap) {
  const char* raw = std::getenv("BVVI_CAP_OVERRIDE");
  if (raw == nullptr || *raw == '\0') return;
  std::uint64_t value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  const auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument(std::string("BVVI_CAP_OVERRIDE is not an unsigned integer: ") + raw);
  }
  history_cap = value;
  policy_cap = value;
}

BoundParams BoundParams::from_model(const TabularPomdp& model, int K, double gamma, double delta) {
  return BoundParams{K, model.H, model.S, model.O, model.A, gamma, delta};
}

double BoundParams::lipschitz() const { return std::exp(std::max(-gamma, 0.0) * H) / std::abs(gamma); }

double BoundParams::risk_factor() const {
  const double g = std::abs(gamma);
  return std::expm1(g * H) / g;
}

double theoretical_bound(const BoundParams& bp, int k) { return theoretical_bound(bp, k, k); }

double theoretical_bound(const BoundParams& bp, int k, int log_episodes) {
  check_risk_level(bp.gamma, bp.H);
  if (k < 1 || log_episodes < 1) throw std::invalid_argument("bound needs k >= 1");
  if (!(bp.delta > 0.0 && bp.delta < 1.0)) throw std::invalid_argument("bound needs delta in (0,1)");
  const double kd = k, H = bp.H, S = bp.S, O = bp.O, A = bp.A;
  const double log_term = std::log(static_cast<double>(log_episodes) * H * S * O * A / bp.delta);
  const double sum = std::sqrt(kd * S) + H * std::sqrt(kd * S * S * A) + H * std::sqrt(kd * S * O) + H * std::sqrt(kd);
  return kBoundLeadingConstant * bp.risk_factor() * std::sqrt(H * log_term) * sum;
}

double optimal_value(const TabularPomdp& model, double gamma, const RegretOptions& options) {
  const OracleResult dp = optimal_by_dp(model, gamma, options.history_cap);
  if (policy_space_size(model.A, model.O, model.H) <= options.policy_cap) {
    const OracleResult brute = optimal_by_enumeration(model, gamma, options.policy_cap);
    if (std::abs(brute.value - dp.value) > 1e-9) {
      std::ostringstream os;
      os.precision(17);
      os << "oracle disagreement: dynamic programming gives " << dp.value << ", enumeration gives " << brute.value;
      throw Error(os.str());
    }
  }
  return dp.value;
}

RegretCurve measure_regret(const TabularPomdp& model, const RunLog& run, const RiskParams& params,
                           const RegretOptions& options) {
  return measure_regret(model, run, params, optimal_value(model, params.gamma, options), options);
}

RegretCurve measure_regret(const TabularPomdp& model, const RunLog& run, const RiskParams& params, double optimal,
                           const RegretOptions& options) {
  const int K = static_cast<int>(run.entries.size());
  const BoundParams bp = BoundParams::from_model(model, K, params.gamma, params.delta);
  RegretCurve curve;
  curve.rows.reserve(K);
  double cumulative = 0.0;
  // Consecutive episodes often repeat a policy; reuse its value.
  const Policy* previous = nullptr;
  double previous_value = 0.0;
  for (int k = 1; k <= K; ++k) {
    const Policy& policy = run.entries[k - 1].policy;
    double learned = 0.0;
    if (previous != nullptr && *previous == policy) {
      learned = previous_value;
    } else {
      learned = evaluate_policy(model, policy, params.gamma, options.history_cap);
    }
    previous = &policy;
    previous_value = learned;
    const double regret = optimal - learned;
    cumulative += regret;
    curve.rows.push_back(RegretRow{k, optimal, learned, regret, cumulative, theoretical_bound(bp, k, K)});
  }
  return curve;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, ptr);
}

void write_regret_csv(const RegretCurve& curve, std::ostream& out) {
  out << "episode,J_opt,J_k,regret_k,cum_regret,bound\n";
  for (const RegretRow& row : curve.rows) {
    out << row.episode << ',' << format_double(row.optimal) << ',' << format_double(row.learned) << ','
        << format_double(row.regret) << ',' << format_double(row.cumulative) << ',' << format_double(row.bound)
        << '\n';
  }
}

std::string regret_csv(const RegretCurve& curve) {
  std::ostringstream os;
  write_regret_csv(curve, os);
  return os.str();
}

std::vector<SeedRun> run_seed_sweep(const TabularPomdp& model, int K, const RiskParams& params,
                                    const std::vector<std::uint64_t>& seeds, const RegretOptions& options,
                                    bool parallel) {
  const double optimal = optimal_value(model, params.gamma, options);
  auto one = [&](std::uint64_t seed) {
    SeedRun run;
    run.seed = seed;
    run.log = run_learning(model, K, params, seed, LearningOptions{options.history_cap, true});
    run.curve = measure_regret(model, run.log, params, optimal, options);
    return run;
  };
  std::vector<SeedRun> out;
  out.reserve(seeds.size());
  if (!parallel || seeds.size() < 2) {
    for (std::uint64_t seed : seeds) out.push_back(one(seed));
    return out;
  }
  std::vector<std::future<SeedRun>> pending;
  pending.reserve(seeds.size());
  for (std::uint64_t seed : seeds) pending.push_back(std::async(std::launch::async, one, seed));
  for (auto& f : pending) out.push_back(f.get());
  return out;
}

SampleComplexityReport sample_complexity_check(const TabularPomdp& model, int K, const RiskParams& params,
                                               double epsilon, const std::vector<std::uint64_t>& seeds,
                                               const RegretOptions& options) {
  if (seeds.empty()) throw std::invalid_argument("sample complexity check needs at least one seed");
  SampleComplexityReport report;
  report.epsilon = epsilon;
  for (const SeedRun& run : run_seed_sweep(model, K, params, seeds, options)) {
    const double average = run.curve.rows.back().cumulative / K;
    report.average_regret_per_seed.push_back(average);
    report.mean_average_regret += average;
    report.max_average_regret = std::max(report.max_average_regret, average);
  }
  report.mean_average_regret /= static_cast<double>(seeds.size());
  report.pass = report.mean_average_regret <= epsilon;
  return report;
}

std::filesystem::path seed_output_path(const std::filesystem::path& out, std::uint64_t seed, bool multiple) {
  if (!multiple) return out;
  std::filesystem::path p = out;
  const std::string stem = out.stem().string();
  const std::string ext = out.extension().string();
  p.replace_filename(stem + "_seed" + std::to_string(seed) + ext);
  return p;
}

}  // namespace bvvi
