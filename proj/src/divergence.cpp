#include "divrisk/divergence.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace divrisk {

namespace {

constexpr double kLog2 = 0.693147180559945309417232121458;

// exp with a hard overflow guard; anything this large is +inf for our
// purposes (the solvers only need the order relation to keep bisecting).
ExtReal guarded_exp(double x) {
  if (x > 700.0) return ExtReal::inf();
  return std::exp(x);
}

// --- scale-1 generator values --------------------------------------------

ExtReal phi1(DivKind k, double a, double u) {
  switch (k) {
    case DivKind::TotalVariation:
      return 0.5 * std::abs(u - 1.0);
    case DivKind::KL:
      return u == 0.0 ? ExtReal(0.0) : ExtReal(u * std::log(u));
    case DivKind::ReverseKL:
      return u == 0.0 ? ExtReal::inf() : ExtReal(-std::log(u));
    case DivKind::PearsonChi2:
      return (u - 1.0) * (u - 1.0);
    case DivKind::NeymanChi2:
      return u == 0.0 ? ExtReal::inf() : ExtReal((u - 1.0) * (u - 1.0) / u);
    case DivKind::SquaredHellinger: {
      double s = std::sqrt(u) - 1.0;
      return s * s;
    }
    case DivKind::JensenShannon:
      if (u == 0.0) return kLog2;
      return u * std::log(u) - (u + 1.0) * std::log(0.5 * (1.0 + u));
    case DivKind::Alpha:
      if (u == 0.0) return a > 0.0 ? ExtReal(1.0 / a) : ExtReal::inf();
      return (std::pow(u, a) - 1.0 - a * (u - 1.0)) / (a * (a - 1.0));
  }
  return ExtReal::inf();  // unreachable
}

// --- scale-1 conjugates (sup over u >= 0, so low-t branches clamp) --------

ExtReal psi1(DivKind k, double a, double t) {
  switch (k) {
    case DivKind::TotalVariation:
      if (t > 0.5) return ExtReal::inf();
      return std::max(t, -0.5);
    case DivKind::KL:
      return guarded_exp(t - 1.0);
    case DivKind::ReverseKL:
      if (t >= 0.0) return ExtReal::inf();
      return -1.0 - std::log(-t);
    case DivKind::PearsonChi2:
      if (t < -2.0) return -1.0;  // supremum sits at u = 0
      return 0.25 * t * t + t;
    case DivKind::NeymanChi2:
      if (t > 1.0) return ExtReal::inf();
      return 2.0 - 2.0 * std::sqrt(1.0 - t);
    case DivKind::SquaredHellinger:
      if (t >= 1.0) return ExtReal::inf();
      return t / (1.0 - t);
    case DivKind::JensenShannon:
      if (t >= kLog2) return ExtReal::inf();
      return -std::log(2.0 - std::exp(t));
    case DivKind::Alpha: {
      double s = 1.0 + (a - 1.0) * t;
      if (s <= 0.0) {
        if (a > 1.0) return -1.0 / a;            // supremum at u = 0
        if (a < 0.0 && s == 0.0) return -1.0 / a;  // closed boundary
        return ExtReal::inf();
      }
      if (a > 1.0 && std::log(s) * a / (a - 1.0) > 700.0) return ExtReal::inf();
      return (std::pow(s, a / (a - 1.0)) - 1.0) / a;
    }
  }
  return ExtReal::inf();
}

ExtReal psi_prime1(DivKind k, double a, double t) {
  switch (k) {
    case DivKind::TotalVariation:
      // left derivatives at the kinks t = -1/2 and t = +1/2
      if (t <= -0.5) return 0.0;
      if (t <= 0.5) return 1.0;
      return ExtReal::inf();
    case DivKind::KL:
      return guarded_exp(t - 1.0);
    case DivKind::ReverseKL:
      if (t >= 0.0) return ExtReal::inf();
      return -1.0 / t;
    case DivKind::PearsonChi2:
      return std::max(0.5 * t + 1.0, 0.0);
    case DivKind::NeymanChi2:
      if (t >= 1.0) return ExtReal::inf();
      return 1.0 / std::sqrt(1.0 - t);
    case DivKind::SquaredHellinger: {
      if (t >= 1.0) return ExtReal::inf();
      double d = 1.0 - t;
      return 1.0 / (d * d);
    }
    case DivKind::JensenShannon: {
      if (t >= kLog2) return ExtReal::inf();
      double e = std::exp(t);
      return e / (2.0 - e);
    }
    case DivKind::Alpha: {
      double s = 1.0 + (a - 1.0) * t;
      if (s <= 0.0) return a > 1.0 ? ExtReal(0.0) : ExtReal::inf();
      if (std::log(s) / (a - 1.0) > 700.0) return ExtReal::inf();
      return std::pow(s, 1.0 / (a - 1.0));
    }
  }
  return ExtReal::inf();
}

void validate(const DivergenceSpec& spec) {
  if (!(spec.scale > 0.0) || !std::isfinite(spec.scale))
    throw std::invalid_argument("divergence scale must be positive and finite");
  if (spec.kind == DivKind::Alpha) {
    double a = spec.alpha_param;
    if (!std::isfinite(a) || a == 0.0 || a == 1.0)
      throw std::invalid_argument("alpha_param must be finite and not in {0, 1}");
  }
}

}  // namespace

const char* div_kind_name(DivKind k) {
  switch (k) {
    case DivKind::TotalVariation: return "total-variation";
    case DivKind::KL: return "kl";
    case DivKind::ReverseKL: return "reverse-kl";
    case DivKind::PearsonChi2: return "pearson-chi2";
    case DivKind::NeymanChi2: return "neyman-chi2";
    case DivKind::SquaredHellinger: return "hellinger";
    case DivKind::JensenShannon: return "jensen-shannon";
    case DivKind::Alpha: return "alpha";
  }
  return "?";
}

DivergenceSpec DivergenceSpec::make(DivKind kind) {
  return make(kind, kind == DivKind::SquaredHellinger ? 0.5 : 1.0);
}

DivergenceSpec DivergenceSpec::make(DivKind kind, double scale) {
  DivergenceSpec s;
  s.kind = kind;
  s.scale = scale;
  validate(s);
  return s;
}

DivergenceSpec DivergenceSpec::alpha(double alpha_param, double scale) {
  DivergenceSpec s;
  s.kind = DivKind::Alpha;
  s.alpha_param = alpha_param;
  s.scale = scale;
  validate(s);
  return s;
}

std::string DivergenceSpec::label() const {
  char buf[64];
  if (kind == DivKind::Alpha)
    std::snprintf(buf, sizeof buf, "alpha[%g;%g]", alpha_param, scale);
  else
    std::snprintf(buf, sizeof buf, "%s[%g]", div_kind_name(kind), scale);
  return buf;
}

DivergenceSpec hellinger(double scale) {
  return DivergenceSpec::make(DivKind::SquaredHellinger, scale);
}
DivergenceSpec kl() { return DivergenceSpec::make(DivKind::KL); }
DivergenceSpec total_variation() { return DivergenceSpec::make(DivKind::TotalVariation); }

ExtReal phi(const DivergenceSpec& spec, double u) {
  validate(spec);
  if (!(u >= 0.0))  // also rejects NaN
    throw std::domain_error("phi: argument must be nonnegative");
  return spec.scale * phi1(spec.kind, spec.alpha_param, u);
}

ExtReal psi(const DivergenceSpec& spec, double t) {
  validate(spec);
  return spec.scale * psi1(spec.kind, spec.alpha_param, t / spec.scale);
}

ExtReal psi_prime_ext(const DivergenceSpec& spec, double t) noexcept {
  return psi_prime1(spec.kind, spec.alpha_param, t / spec.scale);
}

ExtReal psi_prime(const DivergenceSpec& spec, double t) {
  validate(spec);
  ExtReal v = psi_prime_ext(spec, t);
  if (v.infinite()) throw std::domain_error("psi_prime: argument outside dom(psi)");
  return v;
}

ExtReal psi_domain_sup(const DivergenceSpec& spec) {
  double a = spec.alpha_param;
  switch (spec.kind) {
    case DivKind::TotalVariation: return 0.5 * spec.scale;
    case DivKind::KL: return ExtReal::inf();
    case DivKind::ReverseKL: return 0.0;
    case DivKind::PearsonChi2: return ExtReal::inf();
    case DivKind::NeymanChi2: return 1.0 * spec.scale;
    case DivKind::SquaredHellinger: return 1.0 * spec.scale;
    case DivKind::JensenShannon: return kLog2 * spec.scale;
    case DivKind::Alpha:
      if (a > 1.0) return ExtReal::inf();
      return spec.scale / (1.0 - a);
  }
  return ExtReal::inf();
}

double psi_unit_arg(const DivergenceSpec& spec) {
  switch (spec.kind) {
    case DivKind::KL: return spec.scale;
    case DivKind::ReverseKL: return -spec.scale;
    default: return 0.0;  // phi'(1) = 0 for the remaining kinds
  }
}

ProbVector::ProbVector(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw std::invalid_argument("ProbVector: empty");
  double sum = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0)) throw std::invalid_argument("ProbVector: negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("ProbVector: entries must sum to 1");
}

ProbVector ProbVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("ProbVector: empty");
  return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ExtReal divergence_discrete(const DivergenceSpec& spec, const ProbVector& q,
                            const ProbVector& p) {
  validate(spec);
  if (q.size() != p.size())
    throw std::invalid_argument("divergence_discrete: length mismatch");
  ExtReal sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) {
      if (q[i] > 0.0) return ExtReal::inf();  // not absolutely continuous
      continue;
    }
    sum += p[i] * phi(spec, q[i] / p[i]);
    if (sum.infinite()) return sum;
  }
  return sum;
}

ExtReal max_radius(const DivergenceSpec& spec, std::size_t T) {
  validate(spec);
  if (T == 0) throw std::invalid_argument("max_radius: T must be positive");
  double n = static_cast<double>(T);
  ExtReal r = (1.0 / n) * phi(spec, n);
  if (T > 1) r += (1.0 - 1.0 / n) * phi(spec, 0.0);
  return r;
}

}  // namespace divrisk
