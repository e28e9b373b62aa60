#include "divrisk/risk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "divrisk/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace divrisk;

namespace {

// Closed form for two equally likely losses (1, 0) under the scale-1/2
// squared Hellinger ball: writing the reweighting as (z, 2-z)/2 and pushing
// it to the budget boundary gives
//   rho(delta) = ((1 - delta) + sqrt(delta (2 - delta)))^2 / 2,
// valid until the point-mass radius 1 - 1/sqrt(2).
double hell_two_point(double delta) {
  double r = 1.0 - delta + std::sqrt(delta * (2.0 - delta));
  return 0.5 * r * r;
}

std::vector<double> rand_losses(std::mt19937& rng, int T, double lo = -2.0,
                                double hi = 3.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<double> x(T);
  for (auto& v : x) v = U(rng);
  return x;
}

const std::vector<DivergenceSpec> kSmoothKinds = {
    hellinger(),
    kl(),
    DivergenceSpec::make(DivKind::PearsonChi2),
    DivergenceSpec::make(DivKind::NeymanChi2),
    DivergenceSpec::make(DivKind::ReverseKL),
    DivergenceSpec::make(DivKind::JensenShannon),
    DivergenceSpec::alpha(2.0),
    DivergenceSpec::alpha(0.5),
};

double kind_delta(const DivergenceSpec& spec, std::mt19937& rng, int T) {
  // keep the budget within the attainable radius so the solve is interior
  std::uniform_real_distribution<double> U(0.05, 0.9);
  ExtReal r = max_radius(spec, static_cast<std::size_t>(T));
  double cap = r.finite() ? r.value() : 1.0;
  return U(rng) * cap;
}

}  // namespace

TEST_CASE("two-point Hellinger ball matches its closed form") {
  auto loss = EmpiricalLoss::single_path({1.0, 0.0});
  for (double delta : {0.02, 0.05, 0.1, 0.2, 0.28}) {
    CAPTURE(delta);
    double want = hell_two_point(delta);
    RiskResult d = rho_dual(loss, hellinger(), delta);
    RiskResult p = rho_primal(loss, hellinger(), delta);
    CHECK(d.value == doctest::Approx(want).epsilon(1e-10));
    CHECK(p.value == doctest::Approx(want).epsilon(1e-10));
    CHECK(d.attained);
    // rho = q1 * 1 + q2 * 0, so the identifier itself is pinned
    CHECK(d.identifier_single()[0] == doctest::Approx(want).epsilon(1e-9));
    CHECK(d.identifier_single()[1] == doctest::Approx(1.0 - want).epsilon(1e-9));
    CHECK(d.residuals[0] <= 1e-8);
    CHECK(d.residuals[1] <= 1e-8);
    // reported multipliers satisfy the optimality system in original units
    REQUIRE(d.t_star.has_value());
    REQUIRE(d.mu_star.has_value());
    double zsum = 0.0, dsum = 0.0;
    for (double x : {1.0, 0.0}) {
      double z = psi_prime(hellinger(), x / *d.t_star - *d.mu_star).value();
      zsum += 0.5 * z;
      dsum += 0.5 * phi(hellinger(), z).value();
    }
    CHECK(zsum == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(dsum == doctest::Approx(delta).epsilon(1e-7));
  }
}

TEST_CASE("saturated budgets concentrate on the maximum loss") {
  auto loss = EmpiricalLoss::single_path({1.0, 0.0});
  double radius = 1.0 - 1.0 / std::sqrt(2.0);
  for (double delta : {radius, 0.4, 2.0}) {
    RiskResult r = rho_dual(loss, hellinger(), delta);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(r.attained);
    CHECK(r.identifier_single()[0] == doctest::Approx(1.0));
    CHECK(r.identifier_single()[1] == doctest::Approx(0.0));
  }
  // tied maxima share the point mass in proportion to reference weight
  auto tied = EmpiricalLoss::single_path({1.0, 1.0, 0.0});
  RiskResult r = rho_dual(tied, hellinger(), 0.2);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.identifier_single()[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.identifier_single()[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.identifier_single()[2] == doctest::Approx(0.0));
}

TEST_CASE("risk matches the exhaustive grid search") {
  std::mt19937 rng(101);
  std::vector<DivergenceSpec> kinds = kSmoothKinds;
  kinds.push_back(total_variation());
  int checked = 0;
  for (int trial = 0; trial < 27; ++trial) {
    int T = 2 + trial % 3;
    const auto& spec = kinds[trial % kinds.size()];
    auto x = rand_losses(rng, T);
    double delta = kind_delta(spec, rng, T);
    double want = oracle::rho_grid(spec, x, delta);
    RiskResult got = rho_dual(EmpiricalLoss::single_path(x), spec, delta);
    CAPTURE(spec.label());
    CAPTURE(T);
    CAPTURE(delta);
    CHECK(std::abs(got.value - want) <= 2e-3);
    ++checked;
  }
  CHECK(checked == 27);
}

TEST_CASE("multiplier and reweighting forms agree") {
  std::mt19937 rng(211);
  std::uniform_int_distribution<int> Ut(2, 50);
  for (int trial = 0; trial < 40; ++trial) {
    int T = Ut(rng);
    const auto& spec = kSmoothKinds[trial % kSmoothKinds.size()];
    auto x = rand_losses(rng, T);
    double delta = kind_delta(spec, rng, T);
    RiskResult d = rho_dual(EmpiricalLoss::single_path(x), spec, delta);
    if (!d.attained) continue;
    RiskResult p = rho_primal(EmpiricalLoss::single_path(x), spec, delta);
    CAPTURE(spec.label());
    CAPTURE(T);
    CAPTURE(delta);
    CHECK(std::abs(p.value - d.value) <= 1e-6);
    CHECK(d.residuals[0] <= 1e-8);
    CHECK(d.residuals[1] <= 1e-8);
  }
}

TEST_CASE("coherence axioms on random instances") {
  std::mt19937 rng(307);
  std::uniform_real_distribution<double> Uc(0.1, 3.0);
  std::uniform_real_distribution<double> Ushift(-2.0, 2.0);
  std::uniform_int_distribution<int> Ut(2, 20);
  for (int trial = 0; trial < 60; ++trial) {
    int T = Ut(rng);
    const auto& spec =
        trial % 5 == 4 ? total_variation() : kSmoothKinds[trial % kSmoothKinds.size()];
    double delta = kind_delta(spec, rng, T);
    auto x = rand_losses(rng, T);
    auto y = rand_losses(rng, T);
    auto solve = [&](const std::vector<double>& l) {
      return rho_dual(EmpiricalLoss::single_path(l), spec, delta).value;
    };
    double rx = solve(x), ry = solve(y);

    double c = Ushift(rng);
    std::vector<double> shifted = x;
    for (auto& v : shifted) v += c;
    CHECK(solve(shifted) == doctest::Approx(rx + c).epsilon(1e-9).scale(1.0));

    double lam = Uc(rng);
    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= lam;
    CHECK(solve(scaled) == doctest::Approx(lam * rx).epsilon(1e-9).scale(1.0));

    std::vector<double> bigger = x;
    for (int t = 0; t < T; ++t) bigger[t] += std::abs(y[t]);
    CHECK(solve(bigger) >= rx - 1e-7);

    std::vector<double> sum = x;
    for (int t = 0; t < T; ++t) sum[t] += y[t];
    CHECK(solve(sum) <= rx + ry + 1e-7);
  }
}

TEST_CASE("identifier is a monotone, budget-tight reweighting") {
  std::mt19937 rng(401);
  std::uniform_int_distribution<int> Ut(3, 25);
  std::vector<DivergenceSpec> kinds = kSmoothKinds;
  kinds.push_back(total_variation());
  for (int trial = 0; trial < 40; ++trial) {
    int T = Ut(rng);
    const auto& spec = kinds[trial % kinds.size()];
    double delta = kind_delta(spec, rng, T);
    auto x = rand_losses(rng, T);
    RiskResult r = rho_dual(EmpiricalLoss::single_path(x), spec, delta);
    const auto& q = r.identifier_single();

    double total = 0.0;
    for (double qi : q) {
      CHECK(qi >= -1e-15);
      total += qi;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));

    std::vector<std::size_t> order(q.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return x[a] < x[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
      CHECK(q[order[i]] >= q[order[i - 1]] - 1e-9);

    ExtReal d = divergence_discrete(
        spec, ProbVector(std::vector<double>(q.begin(), q.end())),
        ProbVector::uniform(q.size()));
    REQUIRE(d.finite());
    CHECK(d.value() <= delta + 1e-7);
    if (r.attained) CHECK(d.value() == doctest::Approx(delta).epsilon(1e-5));
  }
}

TEST_CASE("tail averaging: hand values and boundary splitting") {
  auto loss = EmpiricalLoss::single_path({1.0, 2.0, 3.0, 4.0});
  CHECK(cvar(loss, 0.75).value == doctest::Approx(4.0));
  CHECK(cvar(loss, 0.5).value == doctest::Approx(3.5));
  CHECK(cvar(loss, 0.0).value == doctest::Approx(2.5));
  CHECK(cvar(loss, 0.6).value == doctest::Approx(3.625));

  auto tied = EmpiricalLoss::single_path({1.0, 2.0, 2.0, 3.0});
  RiskResult r = cvar(tied, 0.5);
  CHECK(r.value == doctest::Approx(2.5));
  CHECK(r.identifier_single()[0] == doctest::Approx(0.0));
  CHECK(r.identifier_single()[1] == doctest::Approx(0.25));
  CHECK(r.identifier_single()[2] == doctest::Approx(0.25));
  CHECK(r.identifier_single()[3] == doctest::Approx(0.5));

  std::mt19937 rng(433);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = rand_losses(rng, 3 + trial % 17);
    double alpha = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    CHECK(cvar(EmpiricalLoss::single_path(x), alpha).value ==
          doctest::Approx(oracle::cvar_sorted(x, alpha)).epsilon(1e-10).scale(1.0));
  }
  CHECK_THROWS_AS((void)cvar(loss, 1.0), std::invalid_argument);
}

TEST_CASE("entropic risk equals the KL-ball risk") {
  // alpha = 1/2 on (1,0): the KL budget -log(1/2) equals the two-point
  // point-mass radius log 2, so the risk saturates at the maximum loss
  CHECK(evar(EmpiricalLoss::single_path({1.0, 0.0}), 0.5) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(evar(EmpiricalLoss::single_path({1.0, 0.0}), 1.0) ==
        doctest::Approx(0.5).epsilon(1e-9));

  std::mt19937 rng(557);
  for (int trial = 0; trial < 25; ++trial) {
    int T = 2 + trial;
    auto x = rand_losses(rng, T, -1.0, 2.0);
    double alpha = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    std::vector<double> probs(T, 1.0 / T);
    double want = oracle::evar_mgf(x, probs, alpha);
    CHECK(evar(EmpiricalLoss::single_path(x), alpha) ==
          doctest::Approx(want).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("risk grows with the budget and respects bounds") {
  std::mt19937 rng(601);
  for (int trial = 0; trial < 20; ++trial) {
    int T = 3 + trial % 12;
    const auto& spec = trial % 4 == 3 ? total_variation()
                                      : kSmoothKinds[trial % kSmoothKinds.size()];
    auto x = rand_losses(rng, T);
    auto loss = EmpiricalLoss::single_path(x);
    double mean = loss.mean(), mx = loss.max_loss();
    double prev = -1e300;
    for (int i = 0; i < 10; ++i) {
      double delta = 0.05 * (i + 1);
      double v = rho_dual(loss, spec, delta).value;
      CHECK(v >= mean - 1e-9);
      CHECK(v <= mx + 1e-9);
      CHECK(v >= prev - 1e-10);
      prev = v;
    }
    CHECK(rho_dual(loss, spec, 0.0).value == doctest::Approx(mean).epsilon(1e-12));
  }
}

TEST_CASE("budget scaling bound for nonnegative losses") {
  std::mt19937 rng(677);
  for (int trial = 0; trial < 20; ++trial) {
    int T = 3 + trial % 10;
    const auto& spec = kSmoothKinds[trial % kSmoothKinds.size()];
    auto x = rand_losses(rng, T, 0.0, 3.0);
    auto loss = EmpiricalLoss::single_path(x);
    double d1 = kind_delta(spec, rng, T) * 0.5;
    for (double c : {1.5, 2.0, 4.0}) {
      double r1 = rho_dual(loss, spec, d1).value;
      double r2 = rho_dual(loss, spec, c * d1).value;
      CHECK(r2 <= c * r1 + 1e-7);
    }
  }
}

TEST_CASE("tail-risk domination condition") {
  // scale-1/2 Hellinger at alpha = 1/2: threshold phi(0)/2 + phi(2)/2
  // works out to 1 - 1/sqrt(2) = 0.2928...
  CHECK_FALSE(cvar_bound_holds(hellinger(), 0.1, 0.5, 2));
  CHECK_FALSE(cvar_bound_holds(hellinger(), 0.29, 0.5, 2));
  CHECK(cvar_bound_holds(hellinger(), 0.293, 0.5, 2));
  // KL at alpha = 1/2: threshold (2 log 2)/2 = log 2
  CHECK_FALSE(cvar_bound_holds(kl(), 0.69, 0.5, 4));
  CHECK(cvar_bound_holds(kl(), 0.70, 0.5, 4));

  std::mt19937 rng(733);
  for (int trial = 0; trial < 25; ++trial) {
    const auto& spec = kSmoothKinds[trial % kSmoothKinds.size()];
    double alpha = std::uniform_real_distribution<double>(0.1, 0.8)(rng);
    ExtReal p0 = phi(spec, 0.0);
    if (!p0.finite()) continue;  // unbounded generators never grant the bound
    double threshold =
        p0.value() * alpha + phi(spec, 1.0 / (1.0 - alpha)).value() * (1.0 - alpha);
    double delta = threshold * 1.02;
    REQUIRE(cvar_bound_holds(spec, delta, alpha, 8));
    auto x = rand_losses(rng, 8);
    auto loss = EmpiricalLoss::single_path(x);
    CHECK(cvar(loss, alpha).value <= rho_dual(loss, spec, delta).value + 1e-7);
  }
}

TEST_CASE("degenerate and invalid inputs") {
  auto loss = EmpiricalLoss::single_path({1.0, 2.0});
  CHECK_THROWS_AS((void)rho_dual(loss, hellinger(), -0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)rho_primal(loss, hellinger(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalLoss({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalLoss({{1.0}, {2.0, 3.0}}, {0.5, 0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalLoss({{1.0}}, {0.9}), std::invalid_argument);

  auto flat = EmpiricalLoss::single_path({0.7, 0.7, 0.7});
  RiskResult r = rho_dual(flat, hellinger(), 0.3);
  CHECK(r.value == doctest::Approx(0.7));
  for (double q : r.identifier_single())
    CHECK(q == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("scenario paths flatten to weighted atoms") {
  EmpiricalLoss panel({{1.0, -0.5, 0.3}, {0.2, 0.9, -1.0}}, {0.3, 0.7});
  std::vector<std::vector<double>> singles;
  std::vector<double> probs;
  for (std::size_t s = 0; s < 2; ++s)
    for (double v : panel.losses()[s]) {
      singles.push_back({v});
      probs.push_back(panel.path_probs()[s] / 3.0);
    }
  EmpiricalLoss flat(singles, probs);
  for (const auto& spec : {hellinger(), kl(), total_variation()})
    for (double delta : {0.05, 0.2}) {
      double a = rho_dual(panel, spec, delta).value;
      double b = rho_dual(flat, spec, delta).value;
      CHECK(a == doctest::Approx(b).epsilon(1e-10));
    }
}
