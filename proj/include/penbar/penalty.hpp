#pragma once

#include "penbar/barrier.hpp"

namespace penbar {

/// One-sided penalty-barrier envelope: the slack-marginalized merge of an
/// L1 penalty of weight rho_star with the barrier b.  Coincides with b up
/// to the breakpoint rho = b*'(rho_star), then continues with its tangent
/// line of slope rho_star.
double psi_value(const Barrier& b, double rho_star, double t);

/// psi'(t) = min{ b'(t), rho_star } (with b'(t) = +inf for t >= 0).
double psi_derivative(const Barrier& b, double rho_star, double t);

/// Optimal one-sided slack [t - b*'(rho_star)]_+.
double marginal_slack(const Barrier& b, double rho_star, double t);

/// Optimal shared slack s* >= 0 of
///   s -> rho_star s + b(t - u - s) + b(l - t - s),   l <= u finite.
/// Evaluates the closed form where one is known, always verifies the
/// first-order condition, and falls back to a safeguarded Newton/bisection
/// solve on the strictly convex objective otherwise.
double psi_bilateral_slack(const Barrier& b, double rho_star, double l,
                           double u, double t);

/// Combined-marginalization envelope for a bilateral constraint l<=t<=u,
/// and its derivative b'(t-u-s*) - b'(l-t-s*) (envelope theorem).
double psi_bilateral_value(const Barrier& b, double rho_star, double l,
                           double u, double t);
double psi_bilateral_derivative(const Barrier& b, double rho_star, double l,
                                double u, double t);

/// Split (two independent inequalities) variant psi(t-u) + psi(l-t) and
/// its derivative.  Exhibits a flat region of width 2(-b*'(rho_star))
/// around (l+u)/2 when l = u.
double psi_split_value(const Barrier& b, double rho_star, double l, double u,
                       double t);
double psi_split_derivative(const Barrier& b, double rho_star, double l,
                            double u, double t);

/// True when the printed closed-form slack satisfies the first-order
/// condition at (l,u,t) to 1e-6 relative; used to quantify how often the
/// numeric fallback engages.
bool bilateral_closed_form_agrees(const Barrier& b, double rho_star, double l,
                                  double u, double t);

/// Constraint-row penalty shape.
enum class PenaltyShape { UpperOnly, LowerOnly, TwoSided, Equality, SplitTwoSided };

/// An instantiated penalty-barrier envelope for one constraint row.
/// Caches the breakpoint b*'(rho_star) and b*(rho_star), which are needed
/// for every evaluation.  Immutable after construction; evaluations are
/// pure and concurrently callable.
class SmoothPenalty {
 public:
  SmoothPenalty(Barrier b, double rho_star, PenaltyShape shape, double l,
                double u);

  double value(double t) const;
  double derivative(double t) const;

  /// Value and derivative in one pass (single slack solve for the
  /// bilateral shapes).
  void eval(double t, double& value, double& derivative) const;

  /// Marginal slack backing the evaluation at t (one-sided or shared).
  double slack(double t) const;

  /// One-sided multipliers per side, used for the complementarity measure:
  /// upper = weight on (t - u), lower = weight on (l - t); both >= 0.
  /// For one-sided shapes the inactive side is 0; for TwoSided/Equality the
  /// signed derivative is split by sign; for SplitTwoSided each side carries
  /// its own envelope derivative.
  void side_derivatives(double t, double& upper, double& lower) const;

  double rho_star() const { return rho_star_; }
  double breakpoint() const { return rho_; }
  PenaltyShape shape() const { return shape_; }
  double lower_bound() const { return l_; }
  double upper_bound() const { return u_; }
  const Barrier& barrier() const { return barrier_; }

 private:
  Barrier barrier_;
  double rho_star_;
  double rho_;        // b*'(rho_star), cached
  double bstar_;      // b*(rho_star), cached
  PenaltyShape shape_;
  double l_, u_;

  double one_sided(double t) const;
  double one_sided_derivative(double t) const;
};

}  // namespace penbar
