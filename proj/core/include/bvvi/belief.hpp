#pragma once

#include <span>
#include <vector>

#include "bvvi/history_table.hpp"
#include "bvvi/model.hpp"

namespace bvvi {

/// Linear map carrying a risk belief across one step after action `a` and
/// observation `o`. Entry (row s', column s) is
///   O * emit[h+1][s'][o] * trans[h][a][s][s'] * exp(gamma * reward[h][s][a]),
/// the uniform-reference factor O included.
struct UpdateOperator {
  int h = 1;
  int a = 0;
  int o = 0;
  int S = 1;
  Vec matrix;  // row-major S x S

  double at(int row, int col) const { return matrix[static_cast<std::size_t>(row) * S + col]; }

  /// out = U x
  void apply(std::span<const double> x, std::span<double> out) const;
  /// out = U^T x
  void apply_transpose(std::span<const double> x, std::span<double> out) const;
};

UpdateOperator build_update_operator(const TabularPomdp& model, int h, int a, int o, double gamma);

/// Unnormalized risk belief sigma_{h,f}.
struct RiskBelief {
  History history;
  Vec vec;
  int step() const { return history.step(); }
};

/// Backward process nu_h; `actions`/`observations` hold (a_h, o_{h+1}, ...,
/// a_H, o_{H+1}) in forward order.
struct ConjugateBelief {
  int h = 1;
  std::vector<int> actions;
  std::vector<int> observations;
  Vec vec;
};

/// sigma_1 = mu1.
RiskBelief initial_belief(const TabularPomdp& model);
RiskBelief propagate_belief(const RiskBelief& sigma, int a, int o, const TabularPomdp& model, double gamma);

/// sigma_{h,f} evaluated straight from its definition: a sum over every
/// hidden path s_1..s_h consistent with f of the reference-model path weight
/// times the Radon-Nikodym factor and exp(gamma * partial return).
/// The policy drops out once f is fixed.
Vec belief_by_definition(const TabularPomdp& model, const History& f, double gamma,
                         std::uint64_t cap = kDefaultHistoryCap);

/// nu_{H+1} = all-ones.
ConjugateBelief terminal_conjugate(const TabularPomdp& model);
/// nu_h = U^T nu_{h+1} with U = U_{a_h, o_{h+1}} at step h = nu.h - 1.
ConjugateBelief propagate_conjugate(const ConjugateBelief& nu, int a, int o, const TabularPomdp& model,
                                    double gamma);

/// <sigma_h, nu_h> for h = 1..H+1 along one complete observable trajectory
/// (a_1..a_H, o_2..o_{H+1}) that must agree with `policy`.
Vec inner_product_trace(const TabularPomdp& model, const Policy& policy, std::span<const int> actions,
                        std::span<const int> observations, double gamma);

/// sigma for every history of steps 1..H+1, built by repeated propagation
/// from mu1. Throws CapExceeded if (A*O)^H > cap.
HistoryTable belief_table(const TabularPomdp& model, double gamma, std::uint64_t cap = kDefaultHistoryCap);

}  // namespace bvvi
