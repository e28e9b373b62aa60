#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "divrisk/divergence.hpp"

namespace divrisk {

/// Empirical loss distribution: S scenario paths of T observations each.
/// Path s carries probability path_probs[s]; observations within a path are
/// equally weighted 1/T.  Most call sites use the single-path form (S = 1).
class EmpiricalLoss {
 public:
  EmpiricalLoss(std::vector<std::vector<double>> losses,
                std::vector<double> path_probs);
  static EmpiricalLoss single_path(std::vector<double> losses);

  [[nodiscard]] std::size_t paths() const { return losses_.size(); }
  [[nodiscard]] std::size_t length() const { return losses_.front().size(); }
  [[nodiscard]] const std::vector<std::vector<double>>& losses() const { return losses_; }
  [[nodiscard]] const std::vector<double>& path_probs() const { return probs_; }

  [[nodiscard]] double mean() const;
  [[nodiscard]] double max_loss() const;

 private:
  std::vector<std::vector<double>> losses_;  // S x T, all rows equal length
  std::vector<double> probs_;                // sums to 1
};

struct SolverConfig {
  double tol_value = 1e-9;  // bisection width targets derive from this
  double tol_feas = 1e-10;  // feasibility slack on the divergence budget
  int max_iter = 200;       // per bisection level
  enum class Method { Auto, Primal, Dual };
  Method method = Method::Auto;
};

/// Outcome of a distributionally robust risk evaluation
///
///   rho(X) = sup { E_Q[X] : D_phi(Q || P) <= delta }.
///
/// `identifier` is the maximizing reweighting q*: an S x T matrix with
/// q_st >= 0 and sum_s sum_t p_s q_st = 1, so that value = sum p_s q_st l_st.
/// For S = 1 it is a probability vector over the T observations.
///
/// When the optimality system
///
///   E[psi'(X/t - mu)] = 1,   E[phi(psi'(X/t - mu))] = delta
///
/// was solved, `t_star`/`mu_star` hold the multipliers and `residuals` the
/// two equation residuals.  The solve is bypassed for delta = 0, constant
/// losses, TotalVariation (kinked conjugate; solved exactly by mass
/// transfer) and for saturated budgets where the ball admits a point mass;
/// in those cases the multipliers are absent and residuals are zero.
///
/// `attained` is the diagnostic for attainment of the infimum in the
/// multiplier form: true iff the probability mass sitting at the maximum
/// loss is strictly below 1 - alpha_bar, where alpha_bar is the largest
/// alpha in [0,1) with phi(0) alpha + phi(1/(1-alpha)) (1-alpha) <= delta.
/// Equivalently: the budget does not admit a point mass on the maximum.
struct RiskResult {
  double value = 0.0;
  std::vector<std::vector<double>> identifier;  // S x T
  std::optional<double> t_star;
  std::optional<double> mu_star;
  bool attained = false;
  int iterations = 0;
  std::array<double, 2> residuals{0.0, 0.0};  // {identity, divergence budget}

  /// Identifier flattened for S = 1 callers.
  [[nodiscard]] const std::vector<double>& identifier_single() const;
};

/// Worst-case expected loss over the divergence ball, solved in the
/// reweighting (dual) variables.  The reported value is the dual objective
/// sum p_s q*_st l_st.  delta >= 0; delta beyond the attainable radius
/// saturates at the maximum loss (mass split across tied maxima in
/// proportion to their reference weights).
RiskResult rho_dual(const EmpiricalLoss& loss, const DivergenceSpec& spec,
                    double delta, const SolverConfig& cfg = {});

/// Same risk functional evaluated through the multiplier (primal) form
/// t (delta + mu + E[psi(X/t - mu)]) at the solved (t*, mu*).  Requires
/// delta > 0.  Falls back to rho_dual (attained flag per the diagnostic
/// above) when the optimality system has no solution: saturated budget,
/// constant losses, or TotalVariation.
RiskResult rho_primal(const EmpiricalLoss& loss, const DivergenceSpec& spec,
                      double delta, const SolverConfig& cfg = {});

/// Dispatch on cfg.method: Auto prefers the multiplier form when delta > 0.
RiskResult rho(const EmpiricalLoss& loss, const DivergenceSpec& spec,
               double delta, const SolverConfig& cfg = {});

/// Conditional value-at-risk at level alpha in [0, 1) for a single path:
/// mean of the (1 - alpha) upper tail, with fractional splitting of the
/// atoms at the quantile boundary (ties at that value share the remaining
/// tail mass equally).  Returns the tail identifier in RiskResult form.
RiskResult cvar(const EmpiricalLoss& loss, double alpha);

/// Entropic value-at-risk at confidence alpha in (0, 1]: the KL-ball risk
/// with budget delta = -log(alpha).
double evar(const EmpiricalLoss& loss, double alpha);

/// True iff phi(0) alpha + phi(1/(1-alpha)) (1-alpha) <= delta, the exact
/// condition under which CVaR_alpha is dominated by the phi-divergence risk
/// at budget delta.  T is accepted for signature symmetry with the ball
/// radius helpers and only validated, not used by the inequality.
bool cvar_bound_holds(const DivergenceSpec& spec, double delta, double alpha,
                      std::size_t T);

}  // namespace divrisk
