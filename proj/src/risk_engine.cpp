#include "divrisk/risk_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "divrisk/errors.hpp"

namespace divrisk {

namespace {

// Flattened view of an S x T loss panel: one atom per (path, time) cell with
// reference weight p_s / T, losses affinely normalized to [0, 1].  The risk
// functional is translation equivariant and positively homogeneous, so
// solving the normalized instance and mapping back is exact and keeps the
// bisection brackets well scaled.
struct FlatProblem {
  std::vector<double> x;  // normalized losses, in [0, 1], max exactly 1
  std::vector<double> w;  // reference weights, sum to 1
  double lo = 0.0;        // original min loss
  double range = 0.0;     // original max - min
  double mass_at_max = 0.0;
};

FlatProblem flatten(const EmpiricalLoss& loss) {
  FlatProblem fp;
  const auto S = loss.paths();
  const auto T = loss.length();
  fp.x.reserve(S * T);
  fp.w.reserve(S * T);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < S; ++s) {
    double ps = loss.path_probs()[s];
    if (ps == 0.0) continue;  // zero-probability paths carry no atoms
    for (std::size_t t = 0; t < T; ++t) {
      double l = loss.losses()[s][t];
      fp.x.push_back(l);
      fp.w.push_back(ps / static_cast<double>(T));
      lo = std::min(lo, l);
      hi = std::max(hi, l);
    }
  }
  fp.lo = lo;
  fp.range = hi - lo;
  if (fp.range > 0.0) {
    for (double& v : fp.x) v = (v - lo) / fp.range;
  } else {
    for (double& v : fp.x) v = 0.0;
  }
  for (std::size_t j = 0; j < fp.x.size(); ++j)
    if (fp.x[j] == 1.0) fp.mass_at_max += fp.w[j];
  return fp;
}

// Identifier matrix q_st from flat atom densities Z (dQ/dP): q_st = Z_st / T,
// zero on zero-probability paths.
std::vector<std::vector<double>> unflatten_identifier(
    const EmpiricalLoss& loss, const std::vector<double>& Z) {
  const auto S = loss.paths();
  const auto T = loss.length();
  std::vector<std::vector<double>> q(S, std::vector<double>(T, 0.0));
  std::size_t j = 0;
  for (std::size_t s = 0; s < S; ++s) {
    if (loss.path_probs()[s] == 0.0) continue;
    for (std::size_t t = 0; t < T; ++t) q[s][t] = Z[j++] / static_cast<double>(T);
  }
  return q;
}

// Divergence budget used by a point mass sitting on the maximal atoms
// (density 1/m there, 0 elsewhere).  This is the cheapest way to reach the
// maximum loss, so the ball saturates exactly when this is within delta.
ExtReal point_mass_divergence(const DivergenceSpec& spec, double mass_at_max) {
  ExtReal d = mass_at_max * phi(spec, 1.0 / mass_at_max);
  if (mass_at_max < 1.0) d += (1.0 - mass_at_max) * phi(spec, 0.0);
  return d;
}

struct UniformResult {
  double value;
  std::vector<double> Z;
};

// Exact solution for TotalVariation: the ball D_tv <= delta permits moving
// total mass eps = min(delta/scale, 1 - mass_at_max); the objective is
// linear, so the optimum drains the smallest losses first and piles
// everything onto the maxima.
UniformResult solve_total_variation(const FlatProblem& fp,
                                    const DivergenceSpec& spec, double delta) {
  const std::size_t n = fp.x.size();
  double eps = std::min(delta / spec.scale, 1.0 - fp.mass_at_max);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fp.x[a] < fp.x[b]; });
  std::vector<double> Z(n, 1.0);
  double rem = eps;
  for (std::size_t j : order) {
    if (rem <= 0.0 || fp.x[j] == 1.0) break;
    double take = std::min(fp.w[j], rem);
    Z[j] = 1.0 - take / fp.w[j];
    rem -= take;
  }
  for (std::size_t j = 0; j < n; ++j)
    if (fp.x[j] == 1.0) Z[j] = 1.0 + eps / fp.mass_at_max;
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += fp.w[j] * Z[j] * fp.x[j];
  return {value, std::move(Z)};
}

// Nested bisection on the optimality system
//   h(t, mu)  = E[psi'(x/t - mu)] = 1          (inner, monotone in mu)
//   g(t)      = E[phi(psi'(x/t - mu*(t)))] = delta   (outer, monotone in t)
// h decreases in mu because psi' is nondecreasing; g decreases in t because
// shrinking the multiplier concentrates the maximizing density.
class CharEqSolver {
 public:
  CharEqSolver(const FlatProblem& fp, const DivergenceSpec& spec, double delta,
               const SolverConfig& cfg)
      : fp_(fp), spec_(spec), delta_(delta), cfg_(cfg),
        y0_(psi_unit_arg(spec)),
        // Bisection widths sit six orders below the requested tolerances so
        // reported residuals land well inside them; the floor is the default
        // full-precision behavior.
        outer_tol_(std::max(1e-15, cfg.tol_value * 1e-6)),
        inner_tol_(std::max(1e-16, cfg.tol_feas * 1e-6)) {}

  struct Out {
    double t, mu;
    std::vector<double> Z;
    int iterations;
  };

  Out solve() {
    double mean = 0.0;
    for (std::size_t j = 0; j < fp_.x.size(); ++j) mean += fp_.w[j] * fp_.x[j];
    double t0 = 1.0 - mean + 1e-3;  // max - mean + eps on the normalized scale
    double t_lo = t0, t_hi = t0;
    int it = 0;
    double g0 = gap(t0);
    if (g0 > 0.0) {
      for (;; ++it) {
        if (it >= cfg_.max_iter)
          throw SolverError("risk solve: no upper bracket for t",
                            {0.0, std::abs(g0)});
        t_hi *= 2.0;
        if (gap(t_hi) <= 0.0) break;
      }
    } else if (g0 < 0.0) {
      for (;; ++it) {
        if (it >= cfg_.max_iter || t_lo < 1e-14)
          throw SolverError("risk solve: no lower bracket for t",
                            {0.0, std::abs(g0)});
        t_lo *= 0.5;
        if (gap(t_lo) >= 0.0) break;
      }
    }
    for (; it < cfg_.max_iter + 200; ++it) {
      double tm = 0.5 * (t_lo + t_hi);
      if (gap(tm) >= 0.0) t_lo = tm; else t_hi = tm;
      if (t_hi - t_lo <= outer_tol_ * t_hi) break;
    }
    Out out;
    out.t = 0.5 * (t_lo + t_hi);
    out.mu = inner(out.t);
    out.Z.resize(fp_.x.size());
    for (std::size_t j = 0; j < fp_.x.size(); ++j) {
      ExtReal z = psi_prime_ext(spec_, fp_.x[j] / out.t - out.mu);
      out.Z[j] = z.finite() ? z.value() : std::numeric_limits<double>::max();
    }
    out.iterations = it;
    return out;
  }

 private:
  // E[psi'(x/t - mu)] as an extended real (+inf once any atom leaves dom psi)
  ExtReal identity_sum(double t, double mu) const {
    ExtReal s = 0.0;
    for (std::size_t j = 0; j < fp_.x.size(); ++j) {
      ExtReal v = psi_prime_ext(spec_, fp_.x[j] / t - mu);
      if (v.infinite()) return ExtReal::inf();
      s += fp_.w[j] * v;
    }
    return s;
  }

  // Solve E[psi'(x/t - mu)] = 1 in mu.  With y0 = psi'^{-1}(1), mu at
  // x_min/t - y0 pushes every argument to >= y0 (sum >= 1) and mu at
  // x_max/t - y0 pushes every argument to <= y0 (sum <= 1): a guaranteed
  // bracket since psi' is nondecreasing.
  double inner(double t) const {
    double lo = 0.0 / t - y0_;
    double hi = 1.0 / t - y0_;
    for (int i = 0; i < cfg_.max_iter + 300; ++i) {
      double mid = 0.5 * (lo + hi);
      ExtReal s = identity_sum(t, mid);
      if (s.infinite() || s.value() >= 1.0) lo = mid; else hi = mid;
      if (hi - lo <= inner_tol_ * std::max({1.0, std::abs(lo), std::abs(hi)})) break;
    }
    return 0.5 * (lo + hi);
  }

  // E[phi(Z)] - delta at the inner solution; +inf maps to a large positive.
  double gap(double t) const {
    double mu = inner(t);
    ExtReal s = 0.0;
    for (std::size_t j = 0; j < fp_.x.size(); ++j) {
      ExtReal z = psi_prime_ext(spec_, fp_.x[j] / t - mu);
      if (z.infinite()) return std::numeric_limits<double>::max();
      s += fp_.w[j] * phi(spec_, z.value());
      if (s.infinite()) return std::numeric_limits<double>::max();
    }
    return s.value() - delta_;
  }

  const FlatProblem& fp_;
  const DivergenceSpec& spec_;
  double delta_;
  const SolverConfig& cfg_;
  double y0_;
  double outer_tol_, inner_tol_;
};

RiskResult uniform_identifier_result(const EmpiricalLoss& loss,
                                     std::size_t active_atoms, double value,
                                     bool attained) {
  RiskResult r;
  r.value = value;
  r.identifier = unflatten_identifier(loss, std::vector<double>(active_atoms, 1.0));
  r.attained = attained;
  return r;
}

enum class ValueForm { Dual, Primal };

RiskResult solve_risk(const EmpiricalLoss& loss, const DivergenceSpec& spec,
                      double delta, const SolverConfig& cfg, ValueForm form) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw std::invalid_argument("risk: delta must be finite and >= 0");

  FlatProblem fp = flatten(loss);

  if (fp.range == 0.0) {
    // degenerate constant loss: every feasible reweighting gives the mean
    return uniform_identifier_result(loss, fp.x.size(), fp.lo, true);
  }
  if (delta == 0.0)
    return uniform_identifier_result(loss, fp.x.size(), loss.mean(), true);

  ExtReal dpm = point_mass_divergence(spec, fp.mass_at_max);
  bool saturated = dpm <= ExtReal(delta * (1.0 + 1e-12) + 1e-15);

  RiskResult r;
  if (saturated) {
    std::vector<double> Z(fp.x.size(), 0.0);
    for (std::size_t j = 0; j < fp.x.size(); ++j)
      if (fp.x[j] == 1.0) Z[j] = 1.0 / fp.mass_at_max;
    r.value = fp.lo + fp.range;  // the maximum loss, exactly
    r.identifier = unflatten_identifier(loss, Z);
    r.attained = false;
    return r;
  }

  if (spec.kind == DivKind::TotalVariation) {
    UniformResult u = solve_total_variation(fp, spec, delta);
    r.value = fp.lo + fp.range * u.value;
    r.identifier = unflatten_identifier(loss, u.Z);
    r.attained = true;  // budget below the point-mass radius
    return r;
  }

  CharEqSolver solver(fp, spec, delta, cfg);
  auto out = solver.solve();

  // renormalize the density so the identifier is feasible to near machine
  // precision, then evaluate both objective forms
  double total = 0.0;
  for (std::size_t j = 0; j < fp.x.size(); ++j) total += fp.w[j] * out.Z[j];
  for (double& z : out.Z) z /= total;

  double value_dual = 0.0;
  ExtReal div = 0.0;
  for (std::size_t j = 0; j < fp.x.size(); ++j) {
    value_dual += fp.w[j] * out.Z[j] * fp.x[j];
    div += fp.w[j] * phi(spec, out.Z[j]);
  }
  ExtReal psum = 0.0;
  for (std::size_t j = 0; j < fp.x.size(); ++j)
    psum += fp.w[j] * psi(spec, fp.x[j] / out.t - out.mu);
  double value_primal = psum.finite()
      ? out.t * (delta + out.mu + psum.value())
      : std::numeric_limits<double>::infinity();

  r.value = fp.lo + fp.range * (form == ValueForm::Dual ? value_dual : value_primal);
  r.identifier = unflatten_identifier(loss, out.Z);
  r.t_star = fp.range * out.t;
  r.mu_star = out.mu + fp.lo / (fp.range * out.t);
  r.attained = true;
  r.iterations = out.iterations;
  r.residuals = {std::abs(total - 1.0),
                 div.finite() ? std::abs(div.value() - delta)
                              : std::numeric_limits<double>::infinity()};
  return r;
}

}  // namespace

EmpiricalLoss::EmpiricalLoss(std::vector<std::vector<double>> losses,
                             std::vector<double> path_probs)
    : losses_(std::move(losses)), probs_(std::move(path_probs)) {
  if (losses_.empty() || losses_.front().empty())
    throw std::invalid_argument("EmpiricalLoss: empty panel");
  if (losses_.size() != probs_.size())
    throw std::invalid_argument("EmpiricalLoss: path count mismatch");
  const std::size_t T = losses_.front().size();
  double sum = 0.0;
  for (std::size_t s = 0; s < losses_.size(); ++s) {
    if (losses_[s].size() != T)
      throw std::invalid_argument("EmpiricalLoss: ragged paths");
    for (double v : losses_[s])
      if (!std::isfinite(v))
        throw std::invalid_argument("EmpiricalLoss: non-finite loss");
    if (!(probs_[s] >= 0.0))
      throw std::invalid_argument("EmpiricalLoss: negative path probability");
    sum += probs_[s];
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("EmpiricalLoss: path probabilities must sum to 1");
}

EmpiricalLoss EmpiricalLoss::single_path(std::vector<double> losses) {
  std::vector<std::vector<double>> m;
  m.push_back(std::move(losses));
  return EmpiricalLoss(std::move(m), {1.0});
}

double EmpiricalLoss::mean() const {
  double m = 0.0;
  for (std::size_t s = 0; s < paths(); ++s) {
    double row = 0.0;
    for (double v : losses_[s]) row += v;
    m += probs_[s] * row / static_cast<double>(length());
  }
  return m;
}

double EmpiricalLoss::max_loss() const {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < paths(); ++s) {
    if (probs_[s] == 0.0) continue;
    for (double v : losses_[s]) hi = std::max(hi, v);
  }
  return hi;
}

const std::vector<double>& RiskResult::identifier_single() const {
  if (identifier.size() != 1)
    throw std::logic_error("identifier_single: multi-path result");
  return identifier.front();
}

RiskResult rho_dual(const EmpiricalLoss& loss, const DivergenceSpec& spec,
                    double delta, const SolverConfig& cfg) {
  return solve_risk(loss, spec, delta, cfg, ValueForm::Dual);
}

RiskResult rho_primal(const EmpiricalLoss& loss, const DivergenceSpec& spec,
                      double delta, const SolverConfig& cfg) {
  if (!(delta > 0.0))
    throw std::invalid_argument("rho_primal: delta must be positive");
  return solve_risk(loss, spec, delta, cfg, ValueForm::Primal);
}

RiskResult rho(const EmpiricalLoss& loss, const DivergenceSpec& spec,
               double delta, const SolverConfig& cfg) {
  switch (cfg.method) {
    case SolverConfig::Method::Dual: return rho_dual(loss, spec, delta, cfg);
    case SolverConfig::Method::Primal: return rho_primal(loss, spec, delta, cfg);
    case SolverConfig::Method::Auto:
    default:
      return delta > 0.0 ? rho_primal(loss, spec, delta, cfg)
                         : rho_dual(loss, spec, delta, cfg);
  }
}

RiskResult cvar(const EmpiricalLoss& loss, double alpha) {
  if (loss.paths() != 1)
    throw std::invalid_argument("cvar: single-path distributions only");
  if (!(alpha >= 0.0) || alpha >= 1.0)
    throw std::invalid_argument("cvar: alpha must lie in [0, 1)");
  const auto& l = loss.losses().front();
  const std::size_t T = l.size();
  const double atom = 1.0 / static_cast<double>(T);
  const double tail = 1.0 - alpha;

  std::vector<std::size_t> order(T);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return l[a] > l[b]; });

  // whole atoms strictly above the quantile boundary, then the boundary
  // value group shares the remaining tail mass equally
  std::vector<double> q(T, 0.0);
  double rem = tail;
  std::size_t i = 0;
  while (i < T) {
    std::size_t j = i;
    while (j < T && l[order[j]] == l[order[i]]) ++j;  // value group [i, j)
    double group = static_cast<double>(j - i) * atom;
    if (group <= rem) {
      for (std::size_t k = i; k < j; ++k) q[order[k]] = atom / tail;
      rem -= group;
      if (rem == 0.0) break;
    } else {
      double share = rem / static_cast<double>(j - i);
      for (std::size_t k = i; k < j; ++k) q[order[k]] = share / tail;
      rem = 0.0;
      break;
    }
    i = j;
  }

  RiskResult r;
  for (std::size_t t = 0; t < T; ++t) r.value += q[t] * l[t];
  r.identifier = {std::move(q)};
  r.attained = true;
  return r;
}

double evar(const EmpiricalLoss& loss, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("evar: alpha must lie in (0, 1]");
  return rho_dual(loss, kl(), -std::log(alpha)).value;
}

bool cvar_bound_holds(const DivergenceSpec& spec, double delta, double alpha,
                      std::size_t T) {
  if (T == 0) throw std::invalid_argument("cvar_bound_holds: T must be positive");
  if (!(alpha >= 0.0) || alpha >= 1.0)
    throw std::invalid_argument("cvar_bound_holds: alpha must lie in [0, 1)");
  if (!(delta >= 0.0))
    throw std::invalid_argument("cvar_bound_holds: delta must be >= 0");
  ExtReal lhs = (1.0 - alpha) * phi(spec, 1.0 / (1.0 - alpha));
  if (alpha > 0.0) lhs += alpha * phi(spec, 0.0);
  return lhs <= ExtReal(delta);
}

}  // namespace divrisk
