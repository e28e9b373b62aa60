#include "divrisk/portfolio_opt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "divrisk/errors.hpp"

namespace divrisk {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

struct Eval {
  RiskResult rr;
  std::vector<double> grad;  // g_i = sum_s sum_t p_s q_st l^i_st
};

Eval evaluate_portfolio(const ScenarioPanel& panel, const DivergenceSpec& spec,
                        double delta, std::span<const double> x,
                        const SolverConfig& cfg) {
  EmpiricalLoss loss(panel.portfolio_losses(x), panel.path_probs);
  Eval e;
  e.rr = rho_dual(loss, spec, delta, cfg);
  e.grad.assign(panel.assets(), 0.0);
  for (std::size_t s = 0; s < panel.paths(); ++s)
    for (std::size_t i = 0; i < panel.assets(); ++i) {
      double acc = 0.0;
      for (std::size_t t = 0; t < panel.length(); ++t)
        acc += e.rr.identifier[s][t] * (-panel.returns[s][i][t]);
      e.grad[i] += panel.path_probs[s] * acc;
    }
  return e;
}

struct Outcome {
  std::vector<double> x;
  double risk = kInf;
  double violation = kInf;  // max(0, target - mean return)
  double lambda = 0.0;
  double pen = 0.0;
  int iterations = 0;
  bool converged = false;
  bool valid = false;
};

// One solve = a subgradient phase on the penalized objective, then (smooth
// generators) a polish by block coordinate descent on the augmented primal.
class SingleSolve {
 public:
  SingleSolve(const PortfolioProblem& p, const OptConfig& cfg)
      : p_(p), cfg_(cfg), mu_(p.panel.mean_returns()) {
    has_floor_ = std::isfinite(p.target_return);
    smooth_ = p.spec.kind != DivKind::TotalVariation;
    double m = 0.0;
    for (const auto& path : p.panel.returns)
      for (const auto& series : path)
        for (double r : series) m = std::max(m, std::abs(r));
    scale_ = std::max(m, 1e-8);
    feas_tol_ = 1e-9 * (1.0 + std::abs(has_floor_ ? p.target_return : 0.0));
    best_vertex_ = static_cast<std::size_t>(
        std::max_element(mu_.begin(), mu_.end()) - mu_.begin());
    // The subgradient phase only has to locate the basin; its risk solves
    // run at reduced precision.
    loose_ = cfg.risk;
    loose_.tol_value = std::max(loose_.tol_value, 1e-4);
    loose_.tol_feas = std::max(loose_.tol_feas, 1e-5);
  }

  bool smooth() const { return smooth_; }

  double ret(std::span<const double> x) const { return dot(mu_, x); }

  double violation(std::span<const double> x) const {
    return has_floor_ ? std::max(0.0, p_.target_return - ret(x)) : 0.0;
  }

  // Blend toward the best-return vertex until the floor holds with equality.
  std::vector<double> restore(std::vector<double> x) const {
    if (!has_floor_) return x;
    double r = ret(x);
    if (r >= p_.target_return) return x;
    double rb = mu_[best_vertex_];
    if (rb <= r) return x;  // floor infeasible everywhere; caller rejects earlier
    double theta = (rb - p_.target_return) / (rb - r);
    theta = std::clamp(theta, 0.0, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= theta;
    x[best_vertex_] += 1.0 - theta;
    return x;
  }

  Outcome phase_a(std::vector<double> x0, int budget) const;
  Outcome polish(Outcome seed) const;

 private:
  struct Best {
    std::vector<double> x;
    double risk = kInf;
    double viol = kInf;
  };

  void consider(Best& b, const std::vector<double>& x, double risk,
                double viol) const {
    bool bf = b.viol <= feas_tol_, cf = viol <= feas_tol_;
    if ((cf && !bf) || (cf == bf && (cf ? risk < b.risk : viol < b.viol))) {
      b = {x, risk, viol};
    }
  }

  // Smooth surrogate for the x-block of the polish: for frozen (t, m),
  //   H(x) = t * sum w_st psi(l_st(x)/t - m) + lam*c(x) + pen/2 * max(0,c)^2
  // with c(x) = target - mean return.  Returns false when psi leaves its
  // domain at some atom.
  bool surrogate(std::span<const double> x, double t, double m, double lam,
                 double pen, double* value, std::vector<double>* grad) const {
    const auto& panel = p_.panel;
    const double T = static_cast<double>(panel.length());
    double acc = 0.0;
    if (grad) grad->assign(panel.assets(), 0.0);
    std::vector<double> coef(panel.length());
    for (std::size_t s = 0; s < panel.paths(); ++s) {
      double w = panel.path_probs[s] / T;
      if (w == 0.0) continue;
      for (std::size_t tt = 0; tt < panel.length(); ++tt) {
        double l = 0.0;
        for (std::size_t i = 0; i < panel.assets(); ++i)
          l -= x[i] * panel.returns[s][i][tt];
        ExtReal v = psi(p_.spec, l / t - m);
        if (v.infinite()) return false;
        acc += w * v.value();
        ExtReal d = psi_prime_ext(p_.spec, l / t - m);
        coef[tt] = w * (d.finite() ? std::min(d.value(), 1e12)
                                   : 1e12);  // guard at domain edges
      }
      if (grad)
        for (std::size_t i = 0; i < panel.assets(); ++i) {
          double gi = 0.0;
          for (std::size_t tt = 0; tt < panel.length(); ++tt)
            gi += coef[tt] * (-panel.returns[s][i][tt]);
          (*grad)[i] += gi;
        }
    }
    double c = has_floor_ ? p_.target_return - ret(x) : 0.0;
    double mult = lam + pen * std::max(0.0, c);
    if (value) *value = t * acc + lam * c + 0.5 * pen * std::max(0.0, c) * c;
    if (grad && has_floor_)
      for (std::size_t i = 0; i < mu_.size(); ++i) (*grad)[i] -= mult * mu_[i];
    return true;
  }

  const PortfolioProblem& p_;
  const OptConfig& cfg_;
  std::vector<double> mu_;
  bool has_floor_ = false;
  bool smooth_ = true;
  double scale_ = 1.0;
  double feas_tol_ = 1e-9;
  std::size_t best_vertex_ = 0;
  SolverConfig loose_;
};

// Projected subgradient on risk + lam*c + pen/2*max(0,c)^2 with diminishing
// normalized steps; the multiplier is refreshed between rounds.
Outcome SingleSolve::phase_a(std::vector<double> x0, int budget) const {
  const auto& panel = p_.panel;
  auto eval = [&](std::span<const double> x) {
    return evaluate_portfolio(panel, p_.spec, p_.delta, x, loose_);
  };

  std::vector<double> x = restore(project_to_simplex(std::move(x0)));
  Eval e = eval(x);

  Best best;
  consider(best, x, e.rr.value, violation(x));

  Outcome out;
  out.lambda = 0.0;
  out.pen = 10.0 / scale_;
  int used = 0;
  bool stopped_early = false;

  int rounds = has_floor_ ? std::clamp(budget / 20, 1, 6) : 1;
  int per_round = std::max(20, budget / rounds);
  double prev_viol = kInf;
  int stall = 0;
  double last_best = best.viol <= feas_tol_ ? best.risk : kInf;
  for (int r = 0; r < rounds && !stopped_early && budget > 0; ++r) {
    for (int k = 0; k < per_round; ++k) {
      ++used;
      std::vector<double> g = e.grad;
      if (has_floor_) {
        double mult = out.lambda + out.pen * violation(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] -= mult * mu_[i];
      }
      double nrm = std::sqrt(dot(g, g));
      if (nrm < 1e-18) {
        stopped_early = true;
        break;
      }
      double step = 0.7 / (std::sqrt(static_cast<double>(used)) * nrm);
      std::vector<double> xn(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - step * g[i];
      x = project_to_simplex(std::move(xn));
      e = eval(x);
      double v = violation(x);
      if (v <= feas_tol_) {
        consider(best, x, e.rr.value, v);
      } else if (used % 20 == 0) {
        auto xr = restore(x);
        consider(best, xr, eval(xr).rr.value, violation(xr));
      }
      double cur = best.viol <= feas_tol_ ? best.risk : kInf;
      if (cur < last_best - cfg_.tol * (1.0 + std::abs(cur))) {
        last_best = cur;
        stall = 0;
      } else if (++stall >= 20) {
        stopped_early = true;
        break;
      }
    }
    if (has_floor_) {
      double c = p_.target_return - ret(x);
      out.lambda = std::max(0.0, out.lambda + out.pen * c);
      double v = std::max(0.0, c);
      if (v > 0.25 * prev_viol) out.pen *= 2.0;
      prev_viol = v;
      if (best.risk < kInf) {
        x = best.x;
        e = eval(x);
      }
    }
  }
  {
    auto xr = restore(x);
    consider(best, xr, eval(xr).rr.value, violation(xr));
  }

  out.x = best.x;
  out.risk = best.risk;
  out.violation = best.viol;
  out.iterations = used;
  out.converged = !smooth_ && stopped_early && best.viol <= feas_tol_;
  out.valid = !best.x.empty();
  return out;
}

// Block coordinate descent on the augmented primal: the (t, m) block is
// solved exactly by the risk engine's characterizing equations, the x block
// by projected gradient with backtracking on the smooth surrogate.
Outcome SingleSolve::polish(Outcome seed) const {
  const auto& panel = p_.panel;
  auto eval = [&](std::span<const double> x) {
    return evaluate_portfolio(panel, p_.spec, p_.delta, x, cfg_.risk);
  };

  std::vector<double> x = seed.x;
  double lambda = seed.lambda, pen = std::max(seed.pen, 10.0 / scale_);
  Best best;
  best.x = seed.x;
  best.risk = seed.risk;
  best.viol = seed.violation;

  double eta = 1.0;
  double prev_merit = kInf;
  int calm = 0;
  int used = seed.iterations;
  bool converged = false;

  for (int outer = 0; outer < 400; ++outer) {
    Eval cur = eval(x);
    ++used;
    double v = violation(x);
    double merit = cur.rr.value + (lambda + 1.0) * v;
    if (v > 0.0) {
      auto xr = restore(x);
      consider(best, xr, eval(xr).rr.value, violation(xr));
    } else {
      consider(best, x, cur.rr.value, v);
    }
    if (std::abs(merit - prev_merit) <= cfg_.tol * (1.0 + std::abs(merit))) {
      if (++calm >= 3) {
        converged = v <= 1e2 * feas_tol_;
        break;
      }
    } else {
      calm = 0;
    }
    prev_merit = merit;
    if (!cur.rr.t_star || !cur.rr.mu_star) break;  // point-mass regime
    double t = *cur.rr.t_star, m = *cur.rr.mu_star;

    for (int it = 0; it < 30; ++it) {
      double h0;
      std::vector<double> g;
      if (!surrogate(x, t, m, lambda, pen, &h0, &g)) break;
      bool accepted = false;
      while (eta >= 1e-18) {
        std::vector<double> xn(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) xn[i] = x[i] - eta * g[i];
        xn = project_to_simplex(std::move(xn));
        double n2 = 0.0, gd = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
          double d = xn[i] - x[i];
          n2 += d * d;
          gd += g[i] * d;
        }
        if (n2 < 1e-26) break;
        double h1;
        if (surrogate(xn, t, m, lambda, pen, &h1, nullptr) &&
            h1 <= h0 + gd + n2 / (2.0 * eta)) {
          x = std::move(xn);
          eta *= 1.25;
          accepted = true;
          break;
        }
        eta *= 0.5;
      }
      if (!accepted) break;
    }
    if (has_floor_) {
      double c = p_.target_return - ret(x);
      lambda = std::max(0.0, lambda + pen * c);
      if (outer % 10 == 9 && std::max(0.0, c) > feas_tol_) pen *= 2.0;
    }
  }
  {
    auto xr = restore(x);
    consider(best, xr, eval(xr).rr.value, violation(xr));
  }

  Outcome out;
  out.x = best.x;
  out.risk = best.risk;
  out.violation = best.viol;
  out.lambda = lambda;
  out.pen = pen;
  out.iterations = used;
  out.converged = converged && best.viol <= feas_tol_;
  out.valid = !best.x.empty();
  return out;
}

// Average weights across assets whose return series coincide exactly, so
// duplicated assets get a deterministic uniform split (the objective only
// sees their sum).
std::vector<double> canonicalize_duplicates(const ScenarioPanel& panel,
                                            std::vector<double> x) {
  const std::size_t I = panel.assets();
  std::vector<bool> done(I, false);
  for (std::size_t i = 0; i < I; ++i) {
    if (done[i]) continue;
    std::vector<std::size_t> group{i};
    for (std::size_t j = i + 1; j < I; ++j) {
      if (done[j]) continue;
      bool same = true;
      for (std::size_t s = 0; s < panel.paths() && same; ++s)
        same = panel.returns[s][i] == panel.returns[s][j];
      if (same) {
        group.push_back(j);
        done[j] = true;
      }
    }
    if (group.size() > 1) {
      double tot = 0.0;
      for (auto k : group) tot += x[k];
      for (auto k : group) x[k] = tot / static_cast<double>(group.size());
    }
  }
  return x;
}

PortfolioSolution finalize_solution(const PortfolioProblem& p,
                                    const OptConfig& cfg, const Outcome& win) {
  PortfolioSolution sol;
  sol.weights = canonicalize_duplicates(p.panel, win.x);
  Eval e = evaluate_portfolio(p.panel, p.spec, p.delta, sol.weights, cfg.risk);
  sol.risk = e.rr.value;
  sol.identifier = e.rr.identifier;
  sol.asset_gradients = e.grad;
  sol.mean_return = dot(p.panel.mean_returns(), sol.weights);
  sol.iterations = win.iterations;
  sol.converged = win.converged;
  double slack = std::isfinite(p.target_return)
                     ? sol.mean_return - p.target_return
                     : kInf;
  sol.lambda_star =
      slack > 1e-7 * (1.0 + std::abs(p.target_return)) ? 0.0 : win.lambda;
  CapmCheck chk = verify_capm(sol, p.panel);
  sol.capm_residuals = chk.residuals;
  return sol;
}

PortfolioSolution solve_with_starts(const PortfolioProblem& p,
                                    const OptConfig& cfg,
                                    std::vector<std::vector<double>> warm) {
  const std::size_t I = p.panel.assets();
  const auto mu = p.panel.mean_returns();
  if (std::isfinite(p.target_return)) {
    double best = *std::max_element(mu.begin(), mu.end());
    if (p.target_return > best + 1e-12 * (1.0 + std::abs(best)))
      throw InfeasibleError(
          "target return " + std::to_string(p.target_return) +
          " exceeds the best single-asset mean return " + std::to_string(best));
  }

  SingleSolve solver(p, cfg);
  if (I == 1) {
    Outcome o;
    o.x = {1.0};
    o.risk = 0.0;
    o.violation = 0.0;
    o.converged = true;
    o.valid = true;
    return finalize_solution(p, cfg, o);
  }

  struct Start {
    std::vector<double> x;
    int budget;
  };
  std::vector<Start> starts;
  int full_budget = solver.smooth() ? std::min(cfg.max_iter, 150) : cfg.max_iter;
  for (auto& w : warm)
    starts.push_back({std::move(w), solver.smooth() ? 40 : full_budget});
  starts.push_back(
      {std::vector<double>(I, 1.0 / static_cast<double>(I)), full_budget});
  if (I <= 6) {
    for (std::size_t i = 0; i < I; ++i) {
      std::vector<double> v(I, 0.0);
      v[i] = 1.0;
      starts.push_back({std::move(v), full_budget});
    }
  }
  std::mt19937_64 rng(cfg.seed);
  std::exponential_distribution<double> ex(1.0);
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> v(I);
    double tot = 0.0;
    for (auto& z : v) tot += (z = ex(rng));
    for (auto& z : v) z /= tot;
    starts.push_back({std::move(v), full_budget});
  }

  std::vector<std::future<Outcome>> jobs;
  jobs.reserve(starts.size());
  for (auto& st : starts)
    jobs.push_back(std::async(std::launch::async, [&solver, st] {
      return solver.phase_a(st.x, st.budget);
    }));
  std::vector<Outcome> outs;
  int total_iters = 0;
  for (auto& j : jobs) {
    Outcome o = j.get();
    total_iters += o.iterations;
    if (o.valid) outs.push_back(std::move(o));
  }
  if (outs.empty())
    throw SolverError("portfolio solve produced no iterate", {kInf, kInf});

  auto better = [](const Outcome& a, const Outcome& b) {
    bool af = a.violation <= 1e-8, bf = b.violation <= 1e-8;
    if (af != bf) return af;
    return af ? a.risk < b.risk : a.violation < b.violation;
  };
  std::stable_sort(outs.begin(), outs.end(), better);

  Outcome win;
  bool any_converged = false;
  if (solver.smooth()) {
    // Polishing is the expensive step; only the leading candidates get it.
    std::size_t k = std::min<std::size_t>(2, outs.size());
    std::vector<std::future<Outcome>> pj;
    for (std::size_t i = 0; i < k; ++i) {
      Outcome seed = outs[i];
      seed.iterations = 0;
      pj.push_back(std::async(std::launch::async, [&solver, seed] {
        return solver.polish(seed);
      }));
    }
    for (auto& j : pj) {
      Outcome o = j.get();
      total_iters += o.iterations;
      any_converged = any_converged || o.converged;
      if (!win.valid || better(o, win)) win = std::move(o);
    }
    if (!win.valid || better(outs.front(), win)) win = outs.front();
  } else {
    win = outs.front();
    for (const auto& o : outs) any_converged = any_converged || o.converged;
  }

  if (!any_converged)
    throw SolverError("portfolio solve did not reach the stopping criterion"
                      " (best violation " + std::to_string(win.violation) + ")",
                      {win.violation, 0.0});
  win.converged = true;
  win.iterations = total_iters;
  return finalize_solution(p, cfg, win);
}

}  // namespace

ScenarioPanel::ScenarioPanel(
    std::vector<std::string> tickers_,
    std::vector<std::vector<std::vector<double>>> returns_,
    std::vector<double> path_probs_)
    : tickers(std::move(tickers_)),
      returns(std::move(returns_)),
      path_probs(std::move(path_probs_)) {
  if (tickers.empty()) throw std::invalid_argument("scenario panel: no assets");
  if (returns.empty()) throw std::invalid_argument("scenario panel: no paths");
  if (path_probs.size() != returns.size())
    throw std::invalid_argument("scenario panel: path probability count mismatch");
  ProbVector check(path_probs);  // nonnegative, sums to one
  (void)check;
  std::size_t T = returns.front().empty() ? 0 : returns.front().front().size();
  if (T == 0) throw std::invalid_argument("scenario panel: empty horizon");
  for (const auto& path : returns) {
    if (path.size() != tickers.size())
      throw std::invalid_argument("scenario panel: asset count mismatch in a path");
    for (const auto& series : path) {
      if (series.size() != T)
        throw std::invalid_argument("scenario panel: ragged horizon");
      for (double r : series)
        if (!std::isfinite(r))
          throw std::invalid_argument("scenario panel: non-finite return");
    }
  }
}

ScenarioPanel ScenarioPanel::single_path(
    std::vector<std::string> tickers_,
    const std::vector<std::vector<double>>& asset_returns) {
  return ScenarioPanel(std::move(tickers_), {asset_returns}, {1.0});
}

std::vector<double> ScenarioPanel::mean_returns() const {
  std::vector<double> mu(assets(), 0.0);
  const double T = static_cast<double>(length());
  for (std::size_t s = 0; s < paths(); ++s)
    for (std::size_t i = 0; i < assets(); ++i) {
      double sum = std::accumulate(returns[s][i].begin(), returns[s][i].end(), 0.0);
      mu[i] += path_probs[s] * sum / T;
    }
  return mu;
}

Matrix ScenarioPanel::portfolio_losses(std::span<const double> weights) const {
  if (weights.size() != assets())
    throw std::invalid_argument("portfolio weights length mismatch");
  Matrix out(paths(), std::vector<double>(length(), 0.0));
  for (std::size_t s = 0; s < paths(); ++s)
    for (std::size_t i = 0; i < assets(); ++i)
      for (std::size_t t = 0; t < length(); ++t)
        out[s][t] -= weights[i] * returns[s][i][t];
  return out;
}

Matrix ScenarioPanel::asset_loss_panel(std::size_t asset) const {
  Matrix out(paths(), std::vector<double>(length()));
  for (std::size_t s = 0; s < paths(); ++s)
    for (std::size_t t = 0; t < length(); ++t)
      out[s][t] = -returns[s][asset][t];
  return out;
}

std::vector<double> project_to_simplex(std::vector<double> v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>{});
  double cum = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    double cand = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - cand > 0.0) theta = cand;
  }
  double total = 0.0;
  for (auto& z : v) total += (z = std::max(0.0, z - theta));
  for (auto& z : v) z /= total;
  return v;
}

PortfolioSolution min_risk(const PortfolioProblem& problem,
                           const OptConfig& cfg) {
  return solve_with_starts(problem, cfg, {});
}

PortfolioSolution max_return(const ScenarioPanel& panel,
                             const DivergenceSpec& spec, double delta,
                             double risk_cap, const OptConfig& cfg) {
  PortfolioProblem base{panel, spec, delta, -kInf};
  const auto mu = panel.mean_returns();
  const std::size_t kbest = static_cast<std::size_t>(
      std::max_element(mu.begin(), mu.end()) - mu.begin());

  auto at_vertex = [&]() {
    Outcome o;
    o.x.assign(panel.assets(), 0.0);
    o.x[kbest] = 1.0;
    o.violation = 0.0;
    o.converged = true;
    o.valid = true;
    PortfolioProblem pb = base;
    pb.target_return = mu[kbest];
    return finalize_solution(pb, cfg, o);
  };
  if (risk_cap == kInf) return at_vertex();

  PortfolioSolution lo_sol = min_risk(base, cfg);
  double feas = 1e-9 * (1.0 + std::abs(risk_cap));
  if (lo_sol.risk > risk_cap + feas)
    throw InfeasibleError("risk cap " + std::to_string(risk_cap) +
                          " is below the minimum achievable risk " +
                          std::to_string(lo_sol.risk));

  PortfolioSolution top = at_vertex();
  if (top.risk <= risk_cap + feas) return top;

  // The minimal risk at a return floor is nondecreasing in the floor, so the
  // largest admissible floor is found by bisection; each probe warm-starts
  // from the last feasible solution.
  OptConfig fast = cfg;
  fast.restarts = 1;
  fast.max_iter = std::min(cfg.max_iter, 2000);
  double lo = lo_sol.mean_return, hi = mu[kbest];
  for (int it = 0; it < 60 && hi - lo > 1e-10 * (1.0 + std::abs(hi)); ++it) {
    double mid = 0.5 * (lo + hi);
    PortfolioProblem pb = base;
    pb.target_return = mid;
    PortfolioSolution s;
    try {
      s = solve_with_starts(pb, fast, {lo_sol.weights});
    } catch (const SolverError&) {
      hi = mid;  // treat an unresolved probe as infeasible at this level
      continue;
    }
    if (s.risk <= risk_cap + feas) {
      lo = mid;
      lo_sol = std::move(s);
    } else {
      hi = mid;
    }
  }
  PortfolioProblem pb = base;
  pb.target_return = lo;
  return solve_with_starts(pb, cfg, {lo_sol.weights});
}

std::vector<FrontierPoint> efficient_frontier(const PortfolioProblem& base,
                                              const std::vector<double>& targets,
                                              const OptConfig& cfg) {
  for (std::size_t i = 1; i < targets.size(); ++i)
    if (targets[i] < targets[i - 1])
      throw std::invalid_argument("efficient_frontier: targets must ascend");
  std::vector<FrontierPoint> out;
  std::vector<std::vector<double>> warm;
  for (double r : targets) {
    FrontierPoint pt;
    pt.target_return = r;
    PortfolioProblem p = base;
    p.target_return = r;
    try {
      pt.solution = solve_with_starts(p, cfg, warm);
      pt.feasible = true;
      warm = {pt.solution.weights};
    } catch (const InfeasibleError& e) {
      pt.note = e.what();
    } catch (const SolverError& e) {
      pt.note = e.what();
    }
    out.push_back(std::move(pt));
  }
  return out;
}

CapmCheck verify_capm(const PortfolioSolution& solution,
                      const ScenarioPanel& panel) {
  CapmCheck chk;
  const auto mu = panel.mean_returns();
  chk.portfolio_mean_return = dot(mu, solution.weights);

  if (panel.assets() == 1) {
    // The portfolio is the single asset itself: beta is one by definition.
    chk.betas = {1.0};
    chk.residuals = {0.0};
    return chk;
  }
  if (!(solution.risk > 0.0)) {
    chk.degenerate = true;
    chk.note = "nonpositive portfolio risk; betas undefined";
    return chk;
  }

  std::vector<double> g = solution.asset_gradients;
  if (g.empty()) {
    g.assign(panel.assets(), 0.0);
    for (std::size_t s = 0; s < panel.paths(); ++s)
      for (std::size_t i = 0; i < panel.assets(); ++i) {
        double acc = 0.0;
        for (std::size_t t = 0; t < panel.length(); ++t)
          acc += solution.identifier[s][t] * (-panel.returns[s][i][t]);
        g[i] += panel.path_probs[s] * acc;
      }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    double beta = g[i] / solution.risk;
    chk.betas.push_back(beta);
    chk.residuals.push_back(mu[i] - beta * chk.portfolio_mean_return);
  }
  if (chk.portfolio_mean_return == 0.0) {
    chk.degenerate = true;
    chk.note = "zero portfolio mean return; pricing relation vacuous";
  }
  return chk;
}

}  // namespace divrisk
