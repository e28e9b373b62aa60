#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "divrisk/market_data.hpp"
#include "divrisk/risk_engine.hpp"

namespace divrisk {

using Matrix = std::vector<std::vector<double>>;

/// Families of market Betas.  The first three divide a robust-reweighted
/// cross moment by the corresponding market risk; the rest are classical
/// comparators.
enum class BetaKind {
  FReturn,    // loss reweighting from the divergence-ball risk of market losses
  FDeviation, // same, applied to deviations from the mean return
  FDrawdown,  // same, applied to the market drawdown track
  Standard,   // covariance / variance
  CDaR,       // CVaR tail weights on market drawdowns
  ERoD,       // uniform weights on the drawdown exceedance set
};

const char* beta_kind_name(BetaKind k);

struct BetaRequest {
  BetaKind kind = BetaKind::FReturn;
  DivergenceSpec spec = hellinger();
  double delta = 0.2;    // divergence budget for the F-families
  double alpha = 0.5;    // CDaR confidence
  double epsilon = 0.0;  // ERoD threshold; 0 means "any strictly positive drawdown"
};

struct BetaReport {
  BetaRequest request;
  std::vector<std::string> tickers;
  std::vector<double> betas;
  double market_risk = 0.0;         // denominator
  std::vector<double> identifier;   // weights q* used by the numerators
  std::vector<std::string> warnings;
};

/// Beta of each asset against the market under the divergence-ball risk of
/// the market losses:
///   beta_i = sum_t q*_t l^i_t / rho(l^M).
/// `asset_losses` holds one series per asset, aligned with `market_losses`.
/// delta above the attainable ball radius is clamped (with a warning).
BetaReport f_beta(const std::vector<std::vector<double>>& asset_losses,
                  const std::vector<double>& market_losses,
                  const DivergenceSpec& spec, double delta,
                  const SolverConfig& cfg = {});

/// Scenario-panel generalization: per-asset S x T loss panels against an
/// S x T market panel with explicit path probabilities.  beta_i =
/// sum_s sum_t p_s q*_st l^i_st / rho(l^M); the single-path functions are
/// the S = 1 case of this code path.
BetaReport f_beta_multipath(const std::vector<Matrix>& asset_losses,
                            const Matrix& market_losses,
                            const std::vector<double>& path_probs,
                            const DivergenceSpec& spec, double delta,
                            const SolverConfig& cfg = {});

/// f_beta applied to deviations d_t = mean(r) - r_t of each series.
BetaReport f_beta_deviation(const std::vector<std::vector<double>>& asset_returns,
                            const std::vector<double>& market_returns,
                            const DivergenceSpec& spec, double delta,
                            const SolverConfig& cfg = {});

/// f_beta applied to the market drawdown track; asset numerators use the
/// asset drawdown measured from the market's peak dates.
BetaReport f_beta_drawdown(const std::vector<std::vector<double>>& asset_returns,
                           const std::vector<double>& market_returns,
                           const DivergenceSpec& spec, double delta,
                           const SolverConfig& cfg = {});

/// Classical beta: cov(asset, market) / var(market), population moments.
double standard_beta(std::span<const double> asset_returns,
                     std::span<const double> market_returns);

/// Drawdown beta with CVaR tail weights on the market drawdown series.
BetaReport cdar_beta(const std::vector<std::vector<double>>& asset_returns,
                     const std::vector<double>& market_returns, double alpha);

/// Drawdown beta averaged uniformly over {t : dd^M_t > epsilon}.
BetaReport erod_beta(const std::vector<std::vector<double>>& asset_returns,
                     const std::vector<double>& market_returns, double epsilon);

/// Dispatch a BetaRequest against an aligned frame.
BetaReport compute_betas(const MarketFrame& frame, const BetaRequest& req,
                         const SolverConfig& cfg = {});

enum class Drift { Increasing, Decreasing, NonMonotone, Flat };
const char* drift_name(Drift d);

struct SweepResult {
  std::vector<double> deltas;
  std::vector<BetaReport> reports;  // one per delta
  std::vector<Drift> drift;         // per asset, across the delta grid
};

/// Betas across a grid of divergence budgets, with a per-asset drift
/// classification: monotone when successive differences share one sign
/// (magnitudes below 1e-10 are treated as zero).
SweepResult delta_sweep(const MarketFrame& frame, const BetaRequest& req,
                        const std::vector<double>& deltas,
                        const SolverConfig& cfg = {});

struct Correlations {
  double pearson = 0.0;
  double spearman = 0.0;
};

/// Pearson and Spearman (average ranks on ties) correlation between two
/// equally long value lists, e.g. Beta columns from different periods.
Correlations period_correlations(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace divrisk
