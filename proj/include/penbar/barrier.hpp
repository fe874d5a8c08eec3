#pragma once

#include <string>

namespace penbar {

/// How a behavior profile kappa_b(theta) is estimated.
enum class ProfileMode { Asymptotic, Max };

/// Scalar barrier function with domain (-inf, 0), finite infimum, b' > 0 and
/// b'' > 0 on the domain, blowing up at the origin.  Ships with closed-form
/// conjugate b* and conjugate derivative b*' (the functional inverse of b').
///
/// Available kinds:
///   InversePower  b(t) = (1/p)(-t)^(-p),  p > 0
///   LogLike       b(t) = ln(1 - 1/t)
///   Exponential   b(t) = exp(-1/t)   (kept only as an ill-conditioned
///                                     specimen; its profile is infinite)
///
/// All evaluations are pure; instances are immutable and safe to share
/// across threads.
class Barrier {
 public:
  enum class Kind { InversePower, LogLike, Exponential };

  static Barrier inverse_power(double p);
  static Barrier log_like();
  static Barrier exponential();

  /// Parses "inverse" (p=1), "inverse_p:<p>", "loglike" or "exp".
  /// Throws std::invalid_argument listing the valid ids otherwise.
  static Barrier from_id(const std::string& id);

  /// Canonical string id, inverse of from_id.
  std::string id() const;

  Kind kind() const { return kind_; }
  double power() const { return p_; }

  /// b(t); +inf for t >= 0.  Total into the extended reals.
  double value(double t) const;

  /// b'(t) > 0, requires t < 0 (throws std::domain_error otherwise).
  double derivative(double t) const;

  /// b''(t) > 0, requires t < 0.
  double second_derivative(double t) const;

  /// Convex conjugate b*(tau) = sup_t { tau t - b(t) }.
  /// +inf for tau < 0; equals -inf(b) at tau = 0.
  double conjugate(double tau) const;

  /// b*'(tau): the unique t < 0 with b'(t) = tau.  Requires tau > 0.
  double conjugate_derivative(double tau) const;

  /// inf b over the domain (0 for inverse/log-like, 1 for exponential).
  double infimum() const;

  /// Numeric estimate of the behavior profile
  ///   kappa_b(theta)     = limsup_{t->0-} b(theta t) / (theta b(t))
  ///   kappa_b^max(theta) = sup_{t<0}      b(theta t) / (theta b(t))
  /// Requires theta in (0,1).  Returns +inf when the ratio exceeds 1e12
  /// anywhere on the evaluation grid.
  double behavior_profile(double theta, ProfileMode mode) const;

 private:
  Barrier(Kind k, double p) : kind_(k), p_(p) {}
  Kind kind_;
  double p_ = 1.0;
};

/// Principal-branch Lambert W on [0, inf), Halley iteration to 1e-12
/// residual.  Used by the exponential barrier's conjugate.
double lambert_w(double x);

}  // namespace penbar
