#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "bvvi/learner.hpp"
#include "bvvi/model.hpp"

namespace bvvi {

struct ExperimentConfig {
  std::filesystem::path model_path;
  double gamma = -0.5;
  double delta = 0.1;
  int episodes = 1;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t history_cap = kDefaultHistoryCap;
  std::uint64_t policy_cap = kDefaultPolicyCap;
  std::filesystem::path out;

  /// Throws std::invalid_argument / NumericRangeError on bad fields.
  void validate() const;
};

/// Applies BVVI_CAP_OVERRIDE, when set, to both caps.
void apply_cap_override(std::uint64_t& history_cap, std::uint64_t& policy_cap);

struct BoundParams {
  int K = 1;
  int H = 1;
  int S = 1;
  int O = 1;
  int A = 1;
  double gamma = 1.0;
  double delta = 0.1;

  static BoundParams from_model(const TabularPomdp& model, int K, double gamma, double delta);

  /// Lipschitz constant of the entropic risk, exp((-gamma)^+ H) / |gamma|.
  double lipschitz() const;
  /// (exp(|gamma| H) - 1) / |gamma|; tends to H as gamma -> 0.
  double risk_factor() const;
};

inline constexpr double kBoundLeadingConstant = 48.0;

/// 48 * risk_factor * sqrt(H ln(k H S O A / delta))
///    * (sqrt(kS) + H sqrt(k S^2 A) + H sqrt(k S O) + H sqrt(k)).
double theoretical_bound(const BoundParams& bp, int k);
/// Same expression with the logarithm taken at `log_episodes` instead of k,
/// matching a learner whose iota is fixed from the full run length.
double theoretical_bound(const BoundParams& bp, int k, int log_episodes);

struct RegretRow {
  int episode = 0;
  double optimal = 0.0;
  double learned = 0.0;
  double regret = 0.0;
  double cumulative = 0.0;
  double bound = 0.0;
};

struct RegretCurve {
  std::vector<RegretRow> rows;
};

struct RegretOptions {
  std::uint64_t history_cap = kDefaultHistoryCap;
  std::uint64_t policy_cap = kDefaultPolicyCap;
};

/// Optimal value of the true model from the DP oracle, cross-checked against
/// policy enumeration when the policy space fits under policy_cap.
double optimal_value(const TabularPomdp& model, double gamma, const RegretOptions& options = {});

/// Exact regret of every logged policy plus the bound column (iota from the
/// run length, as the learner uses).
RegretCurve measure_regret(const TabularPomdp& model, const RunLog& run, const RiskParams& params,
                           const RegretOptions& options = {});
/// Same, with a precomputed optimal value.
RegretCurve measure_regret(const TabularPomdp& model, const RunLog& run, const RiskParams& params,
                           double optimal, const RegretOptions& options = {});

/// Header `episode,J_opt,J_k,regret_k,cum_regret,bound`; shortest
/// round-trip decimal for every number.
void write_regret_csv(const RegretCurve& curve, std::ostream& out);
std::string regret_csv(const RegretCurve& curve);

struct SampleComplexityReport {
  bool pass = false;
  double epsilon = 0.0;
  double mean_average_regret = 0.0;
  double max_average_regret = 0.0;
  std::vector<double> average_regret_per_seed;
};

/// Runs the learner for each seed and compares (1/K) sum_k (J* - J(pi_k)),
/// averaged over seeds, with epsilon.
SampleComplexityReport sample_complexity_check(const TabularPomdp& model, int K, const RiskParams& params,
                                               double epsilon, const std::vector<std::uint64_t>& seeds,
                                               const RegretOptions& options = {});

struct SeedRun {
  std::uint64_t seed = 0;
  RunLog log;
  RegretCurve curve;
};

/// One full learner run plus regret per seed, seeds executed concurrently
/// when `parallel` is set. Results are ordered like `seeds`.
std::vector<SeedRun> run_seed_sweep(const TabularPomdp& model, int K, const RiskParams& params,
                                    const std::vector<std::uint64_t>& seeds, const RegretOptions& options = {},
                                    bool parallel = true);

/// Output file for one seed of a sweep: the path itself for a single seed,
/// otherwise "<stem>_seed<N><ext>".
std::filesystem::path seed_output_path(const std::filesystem::path& out, std::uint64_t seed, bool multiple);

/// Shortest round-trip decimal representation.
std::string format_double(double x);

}  // namespace bvvi
