#pragma once

#include <cstdint>

#include "bvvi/model.hpp"

namespace bvvi {

/// Walks every deterministic history-dependent policy of shape (A, O, H)
/// exactly once, in odometer order over the flat decision table (the last
/// decision point changes fastest).
class PolicySpaceIterator {
 public:
  PolicySpaceIterator(int A, int O, int H, std::uint64_t cap = kDefaultPolicyCap);

  /// A^M with M = sum_h (A*O)^(h-1).
  std::uint64_t size() const { return size_; }
  const Policy& current() const { return current_; }
  /// Advances; returns false once every policy has been visited.
  bool next();

 private:
  Policy current_;
  std::uint64_t size_;
  bool done_ = false;
};

/// A^M for the shape, saturating.
std::uint64_t policy_space_size(int A, int O, int H);

struct OracleResult {
  double value = 0.0;
  Policy policy;
};

/// Best exact objective over the whole deterministic policy space; the first
/// policy in enumeration order wins ties (values within a relative 1e-12).
OracleResult optimal_by_enumeration(const TabularPomdp& model, double gamma, std::uint64_t cap = kDefaultPolicyCap);

/// Bellman-optimality recursion on the true model (the planner with exact
/// parameters and no bonus). The value is the planner's V_1.
OracleResult optimal_by_dp(const TabularPomdp& model, double gamma, std::uint64_t cap = kDefaultHistoryCap);

/// Risk-neutral optimum by alpha-vector recursion over normalized beliefs,
/// zero terminal alpha.
OracleResult risk_neutral_alpha_vi(const TabularPomdp& model, std::uint64_t cap = kDefaultHistoryCap);

/// Exact entropic objective of `policy`; forwards to exact_objective.
double evaluate_policy(const TabularPomdp& model, const Policy& policy, double gamma,
                       std::uint64_t cap = kDefaultHistoryCap);

}  // namespace bvvi
