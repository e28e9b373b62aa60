#include "divrisk/portfolio_opt.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "divrisk/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace divrisk;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Three assets, eight periods, one common crash period (t6) so that every
// long-only portfolio keeps a strictly positive worst-case loss.
ScenarioPanel fixture_panel() {
  return ScenarioPanel::single_path(
      {"A", "B", "C"},
      {{0.02, -0.01, 0.015, -0.005, 0.01, -0.03, -0.015, 0.02},
       {-0.01, 0.03, -0.02, 0.025, 0.005, -0.025, 0.02, -0.01},
       {0.005, 0.005, 0.03, -0.03, 0.02, -0.035, 0.03, -0.005}});
}

double portfolio_risk(const ScenarioPanel& panel, const DivergenceSpec& spec,
                      double delta, const std::vector<double>& x) {
  return rho_dual(EmpiricalLoss(panel.portfolio_losses(x), panel.path_probs),
                  spec, delta)
      .value;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> ex(1.0);
  std::vector<double> v(n);
  double tot = 0.0;
  for (auto& z : v) tot += (z = ex(rng));
  for (auto& z : v) z /= tot;
  return v;
}

}  // namespace

TEST_CASE("simplex projection hand cases") {
  using V = std::vector<double>;
  CHECK(project_to_simplex({0.25, 0.75}) == V{0.25, 0.75});

  auto p = project_to_simplex({0.6, 0.3});  // shortfall split evenly
  CHECK(p[0] == doctest::Approx(0.65).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.35).epsilon(1e-15));

  CHECK(project_to_simplex({-1.0, 0.0}) == V{0.0, 1.0});
  CHECK(project_to_simplex({2.0, 0.0}) == V{1.0, 0.0});

  auto q = project_to_simplex({0.5, 0.5, 0.5});
  for (double w : q) CHECK(w == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(4);
    for (auto& z : v) z = U(rng);
    auto w = project_to_simplex(v);
    double sum = 0.0;
    for (double z : w) {
      CHECK(z >= 0.0);
      sum += z;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("scenario panel bookkeeping") {
  ScenarioPanel p({"A", "B"},
                  {{{0.1, -0.05}, {0.02, 0.0}}, {{0.0, 0.04}, {-0.01, 0.03}}},
                  {0.25, 0.75});
  CHECK(p.paths() == 2);
  CHECK(p.assets() == 2);
  CHECK(p.length() == 2);

  auto mu = p.mean_returns();
  CHECK(mu[0] == doctest::Approx(0.02125).epsilon(1e-15));
  CHECK(mu[1] == doctest::Approx(0.01).epsilon(1e-15));

  auto losses = p.portfolio_losses(std::vector<double>{0.5, 0.5});
  CHECK(losses[0][0] == doctest::Approx(-0.06).epsilon(1e-15));
  CHECK(losses[0][1] == doctest::Approx(0.025).epsilon(1e-15));
  CHECK(losses[1][0] == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(losses[1][1] == doctest::Approx(-0.035).epsilon(1e-15));

  auto lp = p.asset_loss_panel(1);
  CHECK(lp[0][0] == doctest::Approx(-0.02));
  CHECK(lp[1][1] == doctest::Approx(-0.03));

  CHECK_THROWS_AS((void)p.portfolio_losses(std::vector<double>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScenarioPanel({}, {{{0.1}}}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioPanel({"A"}, {{{0.1}}}, {0.9}), std::invalid_argument);
  CHECK_THROWS_AS(ScenarioPanel({"A", "B"}, {{{0.1, 0.2}}}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScenarioPanel({"A", "B"}, {{{0.1, 0.2}, {0.1}}}, {1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ScenarioPanel({"A"}, {{{0.1, std::nan("")}}}, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("single asset portfolio is its own optimum") {
  auto panel = ScenarioPanel::single_path(
      {"ONLY"}, {{0.01, -0.02, 0.03, -0.01, 0.005}});
  PortfolioProblem prob{panel, hellinger(), 0.2, -kInf};
  auto sol = min_risk(prob);
  REQUIRE(sol.weights.size() == 1);
  CHECK(sol.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sol.converged);
  CHECK(sol.lambda_star == 0.0);
  CHECK(sol.risk ==
        doctest::Approx(portfolio_risk(panel, hellinger(), 0.2, {1.0}))
            .epsilon(1e-12));
  CHECK(sol.mean_return == doctest::Approx(0.003).epsilon(1e-12));
  CHECK(sol.capm_residuals == std::vector<double>{0.0});
}

TEST_CASE("an asset that dominates per scenario takes all the weight") {
  // B pays A's return plus 2% in every period: any weight moved from A to B
  // lowers every loss, hence the risk, and raises the mean.
  std::vector<double> a{0.02, -0.01, 0.015, -0.005, 0.01, -0.03, -0.015, 0.02};
  std::vector<double> b(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) b[t] = a[t] + 0.02;
  auto panel = ScenarioPanel::single_path({"A", "B"}, {a, b});
  auto sol = min_risk({panel, hellinger(), 0.25, -kInf});
  CHECK(sol.converged);
  CHECK(sol.weights[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.risk == doctest::Approx(portfolio_risk(panel, hellinger(), 0.25,
                                                   {0.0, 1.0}))
                        .epsilon(1e-6));
}

TEST_CASE("minimum risk matches an exhaustive weight search") {
  auto panel = fixture_panel();
  DivergenceSpec spec = hellinger();
  double delta = 0.3;

  SUBCASE("unconstrained") {
    auto sol = min_risk({panel, spec, delta, -kInf});
    REQUIRE(sol.converged);
    auto ws = oracle::min_risk_grid(panel, spec, delta, -kInf);
    CHECK(std::abs(sol.risk - ws.risk) <= 1e-5);
    CHECK(sol.lambda_star == 0.0);
  }

  SUBCASE("active return floor") {
    double target = 0.0022;
    auto sol = min_risk({panel, spec, delta, target});
    REQUIRE(sol.converged);
    CHECK(sol.mean_return >= target - 1e-7);
    auto ws = oracle::min_risk_grid(panel, spec, delta, target);
    CHECK(std::abs(sol.risk - ws.risk) <= 1e-5);
  }
}

TEST_CASE("solution satisfies first-order optimality accounting") {
  auto panel = fixture_panel();
  DivergenceSpec spec = hellinger();
  double delta = 0.3, target = 0.0022;
  auto sol = min_risk({panel, spec, delta, target});
  REQUIRE(sol.converged);
  REQUIRE(sol.risk > 0.0);

  // weights live on the simplex
  double sum = 0.0;
  for (double w : sol.weights) {
    CHECK(w >= -1e-12);
    sum += w;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

  // multiplier sign and complementary slackness
  CHECK(sol.lambda_star >= 0.0);
  CHECK(sol.lambda_star * (sol.mean_return - target) <= 1e-6);

  // the reported gradient prices the portfolio exactly (Euler identity)
  double euler = 0.0;
  for (std::size_t i = 0; i < sol.weights.size(); ++i)
    euler += sol.weights[i] * sol.asset_gradients[i];
  CHECK(euler == doctest::Approx(sol.risk).epsilon(1e-9));

  // the gradient is a valid subgradient of the risk at the solution
  std::mt19937_64 rng(99);
  for (int k = 0; k < 15; ++k) {
    auto xp = random_simplex(rng, panel.assets());
    double rhs = sol.risk;
    for (std::size_t i = 0; i < xp.size(); ++i)
      rhs += sol.asset_gradients[i] * (xp[i] - sol.weights[i]);
    CHECK(portfolio_risk(panel, spec, delta, xp) >= rhs - 1e-7);
  }

  // risk is convex along random chords
  for (int k = 0; k < 10; ++k) {
    auto x = random_simplex(rng, panel.assets());
    auto y = random_simplex(rng, panel.assets());
    std::vector<double> mid(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mid[i] = 0.5 * (x[i] + y[i]);
    double chord = 0.5 * portfolio_risk(panel, spec, delta, x) +
                   0.5 * portfolio_risk(panel, spec, delta, y);
    CHECK(portfolio_risk(panel, spec, delta, mid) <= chord + 1e-8);
  }
}

TEST_CASE("pricing check derives betas from the solution's own identifier") {
  auto panel = fixture_panel();
  auto sol = min_risk({panel, hellinger(), 0.3, 0.0022});
  REQUIRE(sol.converged);
  REQUIRE(sol.risk > 0.0);

  auto chk = verify_capm(sol, panel);
  REQUIRE(chk.betas.size() == 3);
  CHECK_FALSE(chk.degenerate);
  double mu_p = chk.portfolio_mean_return;
  CHECK(mu_p == doctest::Approx(sol.mean_return).epsilon(1e-12));

  auto mu = panel.mean_returns();
  double beta_mix = 0.0, resid_mix = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(chk.betas[i] ==
          doctest::Approx(sol.asset_gradients[i] / sol.risk).epsilon(1e-12));
    CHECK(chk.residuals[i] ==
          doctest::Approx(mu[i] - chk.betas[i] * mu_p).epsilon(1e-12));
    beta_mix += sol.weights[i] * chk.betas[i];
    resid_mix += sol.weights[i] * chk.residuals[i];
  }
  // the portfolio's beta against itself is one, so its residual vanishes
  CHECK(beta_mix == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(std::abs(resid_mix) <= 1e-9);

  PortfolioSolution broken;
  broken.weights = {0.5, 0.3, 0.2};
  broken.risk = 0.0;
  auto degen = verify_capm(broken, panel);
  CHECK(degen.degenerate);
  CHECK_FALSE(degen.note.empty());
}

TEST_CASE("duplicate assets share weight evenly") {
  std::vector<double> a{0.02, -0.01, 0.015, -0.005, 0.01, -0.03, -0.015, 0.02};
  std::vector<double> worse(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) worse[t] = a[t] - 0.03;
  auto panel = ScenarioPanel::single_path({"A1", "A2", "D"}, {a, a, worse});
  auto sol = min_risk({panel, hellinger(), 0.25, -kInf});
  CHECK(sol.converged);
  CHECK(std::abs(sol.weights[0] - sol.weights[1]) <= 1e-9);
  CHECK(sol.weights[2] <= 1e-7);
}

TEST_CASE("infeasible return targets are rejected") {
  auto panel = fixture_panel();
  CHECK_THROWS_AS((void)min_risk({panel, hellinger(), 0.3, 0.01}),
                  InfeasibleError);
  // a floor exactly at the best single-asset mean is still admissible
  auto sol = min_risk({panel, hellinger(), 0.3, 0.0025});
  CHECK(sol.mean_return >= 0.0025 - 1e-7);
}

TEST_CASE("frontier risks are nondecreasing and report infeasible targets") {
  auto panel = fixture_panel();
  PortfolioProblem base{panel, hellinger(), 0.3, -kInf};
  std::vector<double> targets{0.0008, 0.0014, 0.002, 0.0023, 0.00251};
  auto pts = efficient_frontier(base, targets);
  REQUIRE(pts.size() == 5);

  double prev = -kInf;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    REQUIRE(pts[k].feasible);
    CHECK(pts[k].solution.mean_return >= targets[k] - 1e-7);
    CHECK(pts[k].solution.risk >= prev - 1e-7);
    prev = pts[k].solution.risk;
  }
  CHECK_FALSE(pts.back().feasible);
  CHECK_FALSE(pts.back().note.empty());

  // targets already met by the unconstrained optimum leave it unchanged
  auto un = min_risk(base);
  for (const auto& pt : pts)
    if (pt.feasible && pt.target_return <= un.mean_return) {
      CHECK(pt.solution.risk == doctest::Approx(un.risk).epsilon(1e-6));
      CHECK(pt.solution.lambda_star == 0.0);
    }

  CHECK_THROWS_AS((void)efficient_frontier(base, {0.002, 0.001}),
                  std::invalid_argument);
}

TEST_CASE("return maximization under a risk cap") {
  auto panel = fixture_panel();
  DivergenceSpec spec = hellinger();
  double delta = 0.3;
  auto mu = panel.mean_returns();
  double best_mean = *std::max_element(mu.begin(), mu.end());

  // no cap: the best-mean vertex wins
  auto top = max_return(panel, spec, delta, kInf);
  CHECK(top.converged);
  CHECK(top.mean_return == doctest::Approx(best_mean).epsilon(1e-12));
  CHECK(top.weights[2] == doctest::Approx(1.0).epsilon(1e-12));

  auto un = min_risk({panel, spec, delta, -kInf});

  // a cap below the attainable minimum cannot be met
  CHECK_THROWS_AS((void)max_return(panel, spec, delta, un.risk - 0.003),
                  InfeasibleError);

  // frontier coincidence: capping at the risk of a floor-constrained optimum
  // recovers at least that floor's mean return
  OptConfig quick;
  quick.restarts = 2;
  double target = 0.0022;
  auto floor_sol = min_risk({panel, spec, delta, target}, quick);
  REQUIRE(floor_sol.converged);
  auto capped = max_return(panel, spec, delta, floor_sol.risk, quick);
  CHECK(capped.converged);
  CHECK(capped.mean_return >= target - 1e-4);
  CHECK(capped.risk <= floor_sol.risk + 1e-6);
}
