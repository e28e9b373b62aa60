#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "divrisk/extended_real.hpp"

namespace divrisk {

/// Catalog of f-divergence generators.  Each kind is a convex function
/// phi : [0, inf) -> (-inf, +inf] with phi(1) = 0, lower semicontinuous,
/// and phi(0) taken as the limit from the right.
enum class DivKind {
  TotalVariation,   // |u - 1| / 2
  KL,               // u log u
  ReverseKL,        // -log u
  PearsonChi2,      // (u - 1)^2
  NeymanChi2,       // (u - 1)^2 / u
  SquaredHellinger, // (sqrt(u) - 1)^2
  JensenShannon,    // u log u - (u + 1) log((1 + u) / 2)
  Alpha,            // (u^a - 1 - a(u - 1)) / (a (a - 1)),  a not in {0, 1}
};

const char* div_kind_name(DivKind k);

/// A generator selection: kind, family parameter (Alpha only) and a positive
/// scale factor.  Scaling the generator by `a` scales the divergence and
/// rescales the conjugate as psi_a(t) = a * psi_1(t / a).
///
/// SquaredHellinger defaults to scale 1/2 (the convention in which the
/// squared Hellinger distance is bounded by 1 and the two-point ball radius
/// is 1 - sqrt(1/T)); every other kind defaults to scale 1.  Both
/// conventions are selectable through `scale`.
struct DivergenceSpec {
  DivKind kind = DivKind::SquaredHellinger;
  double alpha_param = 2.0;  // meaningful for DivKind::Alpha only
  double scale = 0.5;

  static DivergenceSpec make(DivKind kind);                 // default scale for the kind
  static DivergenceSpec make(DivKind kind, double scale);   // explicit scale
  static DivergenceSpec alpha(double alpha_param, double scale = 1.0);

  [[nodiscard]] std::string label() const;  // e.g. "hellinger[0.5]", "alpha[2]"
};

DivergenceSpec hellinger(double scale = 0.5);
DivergenceSpec kl();
DivergenceSpec total_variation();

/// Generator value phi(u) for u >= 0 (throws std::domain_error for u < 0).
ExtReal phi(const DivergenceSpec& spec, double u);

/// Convex conjugate psi(t) = sup_{u >= 0} { t u - phi(u) }, evaluated in
/// closed form, +inf outside its effective domain.
ExtReal psi(const DivergenceSpec& spec, double t);

/// Derivative of psi.  Throws std::domain_error outside the closure of
/// dom(psi).  At the TotalVariation kinks (t = +-scale/2) this returns the
/// one-sided derivative from the left; everywhere else psi is differentiable
/// on the interior of its domain.  psi_prime is nondecreasing and
/// nonnegative; its value is the optimal density u attaining the conjugate
/// supremum.
ExtReal psi_prime(const DivergenceSpec& spec, double t);

/// Total extension of psi_prime: +inf at and beyond the domain boundary
/// instead of throwing.  This is what iterative solvers consume.
ExtReal psi_prime_ext(const DivergenceSpec& spec, double t) noexcept;

/// Supremum of dom(psi): +inf when psi is finite on all of R.
ExtReal psi_domain_sup(const DivergenceSpec& spec);

/// The argument y0 with psi'(y0) = 1 (equivalently phi'(1)); the natural
/// centering point for bracketing searches over the conjugate.
double psi_unit_arg(const DivergenceSpec& spec);

/// Discrete probability vector: nonnegative entries summing to one.
class ProbVector {
 public:
  explicit ProbVector(std::vector<double> weights);
  static ProbVector uniform(std::size_t n);

  [[nodiscard]] const std::vector<double>& weights() const { return w_; }
  [[nodiscard]] std::size_t size() const { return w_.size(); }
  double operator[](std::size_t i) const { return w_[i]; }

 private:
  std::vector<double> w_;
};

/// D_phi(q || p) = sum_t p_t phi(q_t / p_t), with the conventions
/// 0 * phi(0/0) = 0 and q_t > 0 on p_t = 0 giving +inf.
ExtReal divergence_discrete(const DivergenceSpec& spec, const ProbVector& q,
                            const ProbVector& p);

/// Largest divergence-ball radius that is attainable against the uniform
/// reference on T atoms: the divergence of a single-point mass,
/// phi(T)/T + (1 - 1/T) phi(0).  Any delta at or above this value makes the
/// worst-case reweighting concentrate entirely on one atom.
ExtReal max_radius(const DivergenceSpec& spec, std::size_t T);

}  // namespace divrisk
