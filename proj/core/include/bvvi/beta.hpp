#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bvvi/belief.hpp"
#include "bvvi/history_table.hpp"
#include "bvvi/model.hpp"

namespace bvvi {

struct BetaVector {
  History history;
  Vec vec;
  int step() const { return history.step(); }
};

/// Componentwise range [exp(min(gamma,0)(H-h+1)), exp(max(gamma,0)(H-h+1))]
/// of every beta vector at step h.
std::pair<double, double> beta_bounds(double gamma, int H, int h);

/// One Markov step of the beta recursion under a fixed action:
///   out[s] = exp(gamma r_h(s,a)) sum_{s'} T_h(s'|s,a) sum_o O_{h+1}(o|s') child_o[s'].
/// `children` holds the O child vectors back to back (child o at o*S).
void backup_beta(const TabularPomdp& model, int h, int a, std::span<const double> children, double gamma,
                 std::span<double> out);

/// Vector-of-children form; throws std::invalid_argument unless one child
/// per observation is given.
Vec backup_beta(const TabularPomdp& model, int h, int a, const std::vector<Vec>& children, double gamma);

/// Randomized form: `action_dist`[a] weights the fixed-action backup whose
/// children are children[a][o].
Vec backup_beta(const TabularPomdp& model, int h, std::span<const double> action_dist,
                const std::vector<std::vector<Vec>>& children, double gamma);

/// beta_{h,f} as the reference-model expectation of the conjugate belief over
/// every future observation sequence, each conjugate belief summed over
/// hidden continuations. Future actions follow `policy`.
Vec beta_by_definition(const TabularPomdp& model, const Policy& policy, const History& f, double gamma,
                       std::uint64_t cap = kDefaultHistoryCap);

/// Beta vectors of `policy` for every history, steps 1..H+1, by the backward
/// recursion.
HistoryTable policy_betas(const TabularPomdp& model, const Policy& policy, double gamma,
                          std::uint64_t cap = kDefaultHistoryCap);

/// (1/gamma) ln <sigma, beta>. Throws UnreachableHistory when the inner
/// product is not positive.
double value_from_representation(std::span<const double> sigma, std::span<const double> beta, double gamma);
double value_from_representation(const RiskBelief& sigma, const BetaVector& beta, double gamma);

/// (1/gamma) ln( (1/O) sum_o <sigma_o, beta_o> ) over the O children of one
/// (history, action) pair, stored back to back.
double q_from_representation(std::span<const double> sigma_children, std::span<const double> beta_children,
                             int S, double gamma);
double q_from_representation(const std::vector<Vec>& sigma_children, const std::vector<Vec>& beta_children,
                             double gamma);

}  // namespace bvvi
