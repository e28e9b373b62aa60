#include "divrisk/betas.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include "divrisk/errors.hpp"

namespace divrisk {

namespace {

constexpr double kDriftTol = 1e-10;

void check_alignment(const std::vector<std::vector<double>>& assets,
                     std::size_t T) {
  if (T == 0) throw std::invalid_argument("beta: empty market series");
  for (const auto& a : assets)
    if (a.size() != T)
      throw ParseError("beta: asset series misaligned with market (" +
                       std::to_string(a.size()) + " vs " + std::to_string(T) + ")");
}

std::vector<std::string> default_tickers(std::size_t n) {
  std::vector<std::string> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back("asset" + std::to_string(i + 1));
  return t;
}

// Shared implementation: numerators are reweighted means of per-asset loss
// panels under the market's risk identifier; denominator is the market risk.
BetaReport ratio_betas(const std::vector<Matrix>& asset_losses,
                       const Matrix& market_losses,
                       const std::vector<double>& path_probs,
                       const DivergenceSpec& spec, double delta,
                       const SolverConfig& cfg) {
  BetaReport rep;
  rep.request.spec = spec;
  rep.request.delta = delta;

  EmpiricalLoss market(market_losses, path_probs);
  const std::size_t S = market.paths();
  const std::size_t T = market.length();
  for (const auto& al : asset_losses) {
    if (al.size() != S) throw ParseError("beta: asset panel path count mismatch");
    for (const auto& row : al)
      if (row.size() != T) throw ParseError("beta: asset panel length mismatch");
  }

  ExtReal radius = max_radius(spec, T);
  double d = delta;
  if (radius.finite() && d > radius.value()) {
    d = radius.value();
    rep.warnings.push_back("delta clamped to the attainable ball radius " +
                           std::to_string(radius.value()));
  }

  RiskResult risk = rho_dual(market, spec, d, cfg);
  if (!(risk.value > 0.0))
    throw DegenerateError("beta: market risk is nonpositive (" +
                          std::to_string(risk.value) + "); Beta undefined");

  rep.market_risk = risk.value;
  if (S == 1) rep.identifier = risk.identifier_single();

  for (const auto& al : asset_losses) {
    double num = 0.0;
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t t = 0; t < T; ++t)
        num += path_probs[s] * risk.identifier[s][t] * al[s][t];
    rep.betas.push_back(num / risk.value);
  }
  rep.tickers = default_tickers(asset_losses.size());
  return rep;
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> o(v.size());
  std::transform(v.begin(), v.end(), o.begin(), std::negate<>{});
  return o;
}

}  // namespace

const char* beta_kind_name(BetaKind k) {
  switch (k) {
    case BetaKind::FReturn: return "f-return";
    case BetaKind::FDeviation: return "f-deviation";
    case BetaKind::FDrawdown: return "f-drawdown";
    case BetaKind::Standard: return "standard";
    case BetaKind::CDaR: return "cdar";
    case BetaKind::ERoD: return "erod";
  }
  return "?";
}

const char* drift_name(Drift d) {
  switch (d) {
    case Drift::Increasing: return "increasing";
    case Drift::Decreasing: return "decreasing";
    case Drift::NonMonotone: return "non-monotone";
    case Drift::Flat: return "flat";
  }
  return "?";
}

BetaReport f_beta_multipath(const std::vector<Matrix>& asset_losses,
                            const Matrix& market_losses,
                            const std::vector<double>& path_probs,
                            const DivergenceSpec& spec, double delta,
                            const SolverConfig& cfg) {
  BetaReport rep = ratio_betas(asset_losses, market_losses, path_probs, spec, delta, cfg);
  rep.request.kind = BetaKind::FReturn;
  return rep;
}

BetaReport f_beta(const std::vector<std::vector<double>>& asset_losses,
                  const std::vector<double>& market_losses,
                  const DivergenceSpec& spec, double delta,
                  const SolverConfig& cfg) {
  check_alignment(asset_losses, market_losses.size());
  std::vector<Matrix> panels;
  panels.reserve(asset_losses.size());
  for (const auto& a : asset_losses) panels.push_back({a});
  return f_beta_multipath(panels, {market_losses}, {1.0}, spec, delta, cfg);
}

BetaReport f_beta_deviation(const std::vector<std::vector<double>>& asset_returns,
                            const std::vector<double>& market_returns,
                            const DivergenceSpec& spec, double delta,
                            const SolverConfig& cfg) {
  check_alignment(asset_returns, market_returns.size());
  std::vector<std::vector<double>> asset_devs;
  asset_devs.reserve(asset_returns.size());
  for (const auto& a : asset_returns) asset_devs.push_back(deviations(a));
  BetaReport rep = f_beta(asset_devs, deviations(market_returns), spec, delta, cfg);
  rep.request.kind = BetaKind::FDeviation;
  return rep;
}

BetaReport f_beta_drawdown(const std::vector<std::vector<double>>& asset_returns,
                           const std::vector<double>& market_returns,
                           const DivergenceSpec& spec, double delta,
                           const SolverConfig& cfg) {
  check_alignment(asset_returns, market_returns.size());
  DrawdownTrack track = drawdown_market(market_returns);
  std::vector<std::vector<double>> asset_dds;
  asset_dds.reserve(asset_returns.size());
  for (const auto& a : asset_returns)
    asset_dds.push_back(drawdown_asset(a, track.peaks));
  BetaReport rep = f_beta(asset_dds, track.drawdown, spec, delta, cfg);
  rep.request.kind = BetaKind::FDrawdown;
  return rep;
}

double standard_beta(std::span<const double> asset_returns,
                     std::span<const double> market_returns) {
  if (asset_returns.size() != market_returns.size() || market_returns.empty())
    throw std::invalid_argument("standard_beta: misaligned series");
  const double n = static_cast<double>(market_returns.size());
  double ma = std::accumulate(asset_returns.begin(), asset_returns.end(), 0.0) / n;
  double mm = std::accumulate(market_returns.begin(), market_returns.end(), 0.0) / n;
  double cov = 0.0, var = 0.0;
  for (std::size_t t = 0; t < market_returns.size(); ++t) {
    cov += (asset_returns[t] - ma) * (market_returns[t] - mm);
    var += (market_returns[t] - mm) * (market_returns[t] - mm);
  }
  if (var == 0.0)
    throw DegenerateError("standard_beta: market variance is zero");
  return cov / var;
}

BetaReport cdar_beta(const std::vector<std::vector<double>>& asset_returns,
                     const std::vector<double>& market_returns, double alpha) {
  check_alignment(asset_returns, market_returns.size());
  DrawdownTrack track = drawdown_market(market_returns);

  RiskResult tail = cvar(EmpiricalLoss::single_path(track.drawdown), alpha);
  if (!(tail.value > 0.0))
    throw DegenerateError("cdar_beta: market drawdown CVaR is nonpositive");

  BetaReport rep;
  rep.request.kind = BetaKind::CDaR;
  rep.request.alpha = alpha;
  rep.market_risk = tail.value;
  rep.identifier = tail.identifier_single();
  for (const auto& a : asset_returns) {
    auto dd = drawdown_asset(a, track.peaks);
    double num = std::inner_product(dd.begin(), dd.end(),
                                    rep.identifier.begin(), 0.0);
    rep.betas.push_back(num / tail.value);
  }
  rep.tickers = default_tickers(asset_returns.size());
  return rep;
}

BetaReport erod_beta(const std::vector<std::vector<double>>& asset_returns,
                     const std::vector<double>& market_returns, double epsilon) {
  if (epsilon < 0.0) throw std::invalid_argument("erod_beta: epsilon must be >= 0");
  check_alignment(asset_returns, market_returns.size());
  DrawdownTrack track = drawdown_market(market_returns);

  std::vector<std::size_t> exceed;
  double denom = 0.0;
  for (std::size_t t = 0; t < track.drawdown.size(); ++t)
    if (track.drawdown[t] > epsilon) {
      exceed.push_back(t);
      denom += track.drawdown[t];
    }
  if (exceed.empty())
    throw DegenerateError("erod_beta: no drawdown exceeds the threshold");

  BetaReport rep;
  rep.request.kind = BetaKind::ERoD;
  rep.request.epsilon = epsilon;
  rep.market_risk = denom / static_cast<double>(exceed.size());
  rep.identifier.assign(track.drawdown.size(), 0.0);
  for (std::size_t t : exceed)
    rep.identifier[t] = 1.0 / static_cast<double>(exceed.size());
  for (const auto& a : asset_returns) {
    auto dd = drawdown_asset(a, track.peaks);
    double num = 0.0;
    for (std::size_t t : exceed) num += dd[t];
    rep.betas.push_back(num / denom);
  }
  rep.tickers = default_tickers(asset_returns.size());
  return rep;
}

BetaReport compute_betas(const MarketFrame& frame, const BetaRequest& req,
                         const SolverConfig& cfg) {
  std::vector<std::vector<double>> asset_series;
  asset_series.reserve(frame.assets());

  BetaReport rep;
  switch (req.kind) {
    case BetaKind::FReturn: {
      for (std::size_t i = 0; i < frame.assets(); ++i)
        asset_series.push_back(frame.asset_losses(i));
      rep = f_beta(asset_series, frame.market_losses(), req.spec, req.delta, cfg);
      break;
    }
    case BetaKind::FDeviation: {
      for (std::size_t i = 0; i < frame.assets(); ++i)
        asset_series.push_back(frame.asset_returns(i));
      rep = f_beta_deviation(asset_series, frame.market_returns(), req.spec,
                             req.delta, cfg);
      break;
    }
    case BetaKind::FDrawdown: {
      for (std::size_t i = 0; i < frame.assets(); ++i)
        asset_series.push_back(frame.asset_returns(i));
      rep = f_beta_drawdown(asset_series, frame.market_returns(), req.spec,
                            req.delta, cfg);
      break;
    }
    case BetaKind::Standard: {
      rep.request = req;
      double mm = std::accumulate(frame.market_returns().begin(),
                                  frame.market_returns().end(), 0.0) /
                  static_cast<double>(frame.periods());
      double var = 0.0;
      for (double r : frame.market_returns()) var += (r - mm) * (r - mm);
      rep.market_risk = var / static_cast<double>(frame.periods());
      for (std::size_t i = 0; i < frame.assets(); ++i)
        rep.betas.push_back(
            standard_beta(frame.asset_returns(i), frame.market_returns()));
      break;
    }
    case BetaKind::CDaR: {
      for (std::size_t i = 0; i < frame.assets(); ++i)
        asset_series.push_back(frame.asset_returns(i));
      rep = cdar_beta(asset_series, frame.market_returns(), req.alpha);
      break;
    }
    case BetaKind::ERoD: {
      for (std::size_t i = 0; i < frame.assets(); ++i)
        asset_series.push_back(frame.asset_returns(i));
      rep = erod_beta(asset_series, frame.market_returns(), req.epsilon);
      break;
    }
  }
  BetaRequest echo = req;
  rep.request = echo;
  rep.tickers = frame.tickers();
  return rep;
}

SweepResult delta_sweep(const MarketFrame& frame, const BetaRequest& req,
                        const std::vector<double>& deltas,
                        const SolverConfig& cfg) {
  if (deltas.empty()) throw std::invalid_argument("delta_sweep: empty grid");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] > deltas[i - 1]))
      throw std::invalid_argument("delta_sweep: grid must be strictly increasing");

  SweepResult out;
  out.deltas = deltas;
  out.reports.resize(deltas.size());

  std::vector<std::future<BetaReport>> jobs;
  jobs.reserve(deltas.size());
  for (double d : deltas)
    jobs.push_back(std::async(std::launch::async, [&, d] {
      BetaRequest r = req;
      r.delta = d;
      return compute_betas(frame, r, cfg);
    }));
  for (std::size_t i = 0; i < jobs.size(); ++i) out.reports[i] = jobs[i].get();

  // drift of each asset's Beta across the grid
  for (std::size_t a = 0; a < frame.assets(); ++a) {
    bool up = false, down = false;
    for (std::size_t i = 1; i < deltas.size(); ++i) {
      double diff = out.reports[i].betas[a] - out.reports[i - 1].betas[a];
      if (diff > kDriftTol) up = true;
      else if (diff < -kDriftTol) down = true;
    }
    out.drift.push_back(up && down ? Drift::NonMonotone
                        : up       ? Drift::Increasing
                        : down     ? Drift::Decreasing
                                   : Drift::Flat);
  }
  return out;
}

Correlations period_correlations(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("period_correlations: need two aligned lists");
  const std::size_t n = a.size();

  auto pearson = [n](std::span<const double> x, std::span<const double> y) {
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sxy += (x[i] - mx) * (y[i] - my);
      sxx += (x[i] - mx) * (x[i] - mx);
      syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0)
      throw DegenerateError("period_correlations: constant list");
    return sxy / std::sqrt(sxx * syy);
  };

  // average ranks, ties share the mean rank of their block
  auto ranks = [n](std::span<const double> x) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && x[idx[j]] == x[idx[i]]) ++j;
      double mean_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
      for (std::size_t k = i; k < j; ++k) r[idx[k]] = mean_rank;
      i = j;
    }
    return r;
  };

  Correlations c;
  c.pearson = pearson(a, b);
  auto ra = ranks(a), rb = ranks(b);
  c.spearman = pearson(ra, rb);
  return c;
}

}  // namespace divrisk
