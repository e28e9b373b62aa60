#pragma once

// Mean-risk portfolio selection over a scenario panel.
//
// The decision variable is a long-only weight vector x on the unit simplex.
// Portfolio losses are the negated weighted returns, and the objective is the
// divergence-ball risk of those losses.  Two problem shapes are provided:
//
//   min_risk    minimize risk subject to a mean-return floor,
//   max_return  maximize mean return subject to a risk cap,
//
// and both trace the same efficient frontier.  Solutions carry the optimal
// reweighting (identifier), the return-constraint multiplier, and the
// per-asset pricing residuals mean(r^i) - beta_i * mean(r^{x*}), which vanish
// for held assets at a true optimum with the return constraint active.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "divrisk/divergence.hpp"
#include "divrisk/risk_engine.hpp"

namespace divrisk {

using Matrix = std::vector<std::vector<double>>;

// S sample paths, each holding T periods of simple returns for I assets.
struct ScenarioPanel {
  std::vector<std::string> tickers;                       // I labels
  std::vector<std::vector<std::vector<double>>> returns;  // [path][asset][t]
  std::vector<double> path_probs;                         // length S, sums to 1

  ScenarioPanel() = default;
  ScenarioPanel(std::vector<std::string> tickers_,
                std::vector<std::vector<std::vector<double>>> returns_,
                std::vector<double> path_probs_);

  // Single path with probability one; asset_returns is I series of length T.
  static ScenarioPanel single_path(
      std::vector<std::string> tickers_,
      const std::vector<std::vector<double>>& asset_returns);

  std::size_t paths() const { return returns.size(); }
  std::size_t assets() const { return tickers.size(); }
  std::size_t length() const {
    return returns.empty() || returns.front().empty()
               ? 0
               : returns.front().front().size();
  }

  // Path-probability-weighted mean return of each asset.
  std::vector<double> mean_returns() const;

  // S x T losses of the portfolio with the given weights.
  Matrix portfolio_losses(std::span<const double> weights) const;

  // Loss panel of one asset (S x T), for Beta computations.
  Matrix asset_loss_panel(std::size_t asset) const;
};

struct PortfolioProblem {
  ScenarioPanel panel;
  DivergenceSpec spec = hellinger();
  double delta = 0.2;
  // Mean-return floor; -infinity leaves the return unconstrained.
  double target_return = -std::numeric_limits<double>::infinity();
};

struct OptConfig {
  int max_iter = 10000;      // first-phase subgradient iteration budget
  double tol = 1e-9;         // relative objective change declaring convergence
  int restarts = 5;          // random starting points beyond the deterministic ones
  unsigned long long seed = 987654321ULL;
  SolverConfig risk;         // settings for the inner risk evaluations
};

struct PortfolioSolution {
  std::vector<double> weights;          // on the simplex
  double risk = 0.0;
  double mean_return = 0.0;
  double lambda_star = 0.0;             // return-constraint multiplier (0 if slack)
  Matrix identifier;                    // optimal reweighting at x*, S x T
  std::vector<double> asset_gradients;  // g_i = sum_s sum_t p_s q*_st l^i_st
  std::vector<double> capm_residuals;   // mean(r^i) - beta_i * mean(r^{x*})
  int iterations = 0;
  bool converged = false;
};

// Minimize risk over {x on simplex : mean return >= target}.  Throws
// InfeasibleError when the target exceeds every single asset's mean return,
// SolverError when no restart reaches the stopping criterion.
PortfolioSolution min_risk(const PortfolioProblem& problem,
                           const OptConfig& cfg = {});

// Maximize mean return over {x on simplex : risk <= risk_cap}.  Throws
// InfeasibleError when the cap is below the minimum achievable risk.
PortfolioSolution max_return(const ScenarioPanel& panel,
                             const DivergenceSpec& spec, double delta,
                             double risk_cap, const OptConfig& cfg = {});

struct FrontierPoint {
  double target_return = 0.0;
  bool feasible = false;
  PortfolioSolution solution;  // meaningful only when feasible
  std::string note;            // failure reason otherwise
};

// min_risk at each target (ascending); infeasible targets are recorded, not
// fatal.  Risk is nondecreasing along the feasible range.
std::vector<FrontierPoint> efficient_frontier(const PortfolioProblem& base,
                                              const std::vector<double>& targets,
                                              const OptConfig& cfg = {});

struct CapmCheck {
  std::vector<double> betas;      // beta_i of each asset against the portfolio
  std::vector<double> residuals;  // mean(r^i) - beta_i * portfolio mean return
  double portfolio_mean_return = 0.0;
  bool degenerate = false;        // zero portfolio mean return or nonpositive risk
  std::string note;
};

// Pricing check of a solved portfolio: betas come from the solution's own
// identifier and risk value.  For held assets at an optimum with the return
// constraint active the residuals vanish; for unheld assets they are <= 0 and
// are reported without being asserted to be zero.
CapmCheck verify_capm(const PortfolioSolution& solution,
                      const ScenarioPanel& panel);

// Euclidean projection onto the unit simplex (exposed for tests).
std::vector<double> project_to_simplex(std::vector<double> v);

}  // namespace divrisk
