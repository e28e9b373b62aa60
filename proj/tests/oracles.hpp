#pragma once

// Reference implementations used to cross-check the library.  Everything in
// this file recomputes its quantity from first principles: the generator
// formulas are restated locally and the searches are exhaustive, so none of
// the solver machinery under test is exercised here (the portfolio oracles
// delegate risk evaluation to the risk engine, which is itself validated
// against the grid oracle first).

#include <span>
#include <vector>

#include "divrisk/divergence.hpp"
#include "divrisk/portfolio_opt.hpp"

namespace oracle {

// Worst-case reweighted mean over the divergence ball, by exhaustive search
// on a probability-simplex grid (uniform reference weights) followed by
// pairwise mass transfers shrinking to 1e-9.  Supports losses.size() in
// {2, 3, 4}.
double rho_grid(const divrisk::DivergenceSpec& spec,
                std::span<const double> losses, double delta,
                double step = 1e-3);

// Same search, also reporting the maximizing weights.
std::vector<double> rho_grid_weights(const divrisk::DivergenceSpec& spec,
                                     std::span<const double> losses,
                                     double delta, double step = 1e-3);

// Entropic value-at-risk by direct minimization of the exponential-moment
// bound (z m + log E exp(z (X - m)) - log alpha) / z over z > 0, bracketing
// the minimum by doubling and closing in by golden section.
double evar_mgf(std::span<const double> losses, std::span<const double> probs,
                double alpha);

// Tail mean beyond the alpha-quantile with fractional splitting of the
// boundary atom; uniform weights.
double cvar_sorted(std::span<const double> losses, double alpha);

// Portfolio searches on the I = 3 weight simplex: coarse grid then repeated
// 10x local zoom.  `target_return` of -infinity disables the floor.
struct WeightSearch {
  std::vector<double> weights;
  double risk = 0.0;
  double mean_return = 0.0;
};

WeightSearch min_risk_grid(const divrisk::ScenarioPanel& panel,
                           const divrisk::DivergenceSpec& spec, double delta,
                           double target_return, double step = 0.01);

// Weights maximizing mean return / risk; the tangency portfolio that makes
// the return floor both active and shadow-price-free.
WeightSearch tangency_grid(const divrisk::ScenarioPanel& panel,
                           const divrisk::DivergenceSpec& spec, double delta,
                           double step = 0.01);

}  // namespace oracle
