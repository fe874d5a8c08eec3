#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "penbar/penalty.hpp"
#include "penbar/prox.hpp"

namespace penbar {

/// Classification of a constraint row from its bounds.
enum class RowKind { UpperOnly, LowerOnly, TwoSided, Equality };

RowKind classify_row(double l, double u);

/// Smooth-cost oracle: writes f(x) and grad f(x); returns false when the
/// evaluation produced nonfinite values.
using SmoothEval =
    std::function<bool(const Vec& x, double& value, Vec& grad)>;

/// Constrained structured problem
///   minimize f(x) + g(x)   subject to   l <= c(x) <= u
/// with f smooth, g prox-friendly and c continuously differentiable.
/// The Jacobian of c is exposed as its transpose action v -> Jc(x)^T v,
/// which is all the algorithm needs and keeps matrix-free problems cheap.
struct ProblemSpec {
  int n = 0;

  SmoothEval smooth;
  ProxPtr nonsmooth;

  /// Writes c(x); returns false on nonfinite values.
  std::function<bool(const Vec& x, Vec& c)> constraints;
  /// Writes Jc(x)^T v.
  std::function<void(const Vec& x, const Vec& v, Vec& jtv)> jacobian_t;

  /// Per-row bounds; l_i in [-inf, inf), u_i in (-inf, inf], l_i <= u_i,
  /// at least one finite per row.
  Vec lower, upper;

  int num_rows() const { return static_cast<int>(lower.size()); }
  RowKind row_kind(int i) const { return classify_row(lower[i], upper[i]); }
  /// Number of inequality/bilateral rows.
  int num_inequality_rows() const;
  /// Number of equality rows.
  int num_equality_rows() const;

  /// Throws std::invalid_argument when sizes, bounds or oracles are
  /// inconsistent.
  void validate() const;
};

/// The smooth penalty-barrier subproblem
///   F(x) = f(x) + mu * sum_i psi_i(c_i(x))
/// for fixed (alpha, mu), with one instantiated envelope per constraint
/// row.  Owns the gradient-evaluation counter for one solver instance.
class Subproblem {
 public:
  Subproblem(const ProblemSpec& prob, const Barrier& barrier, double alpha,
             double mu, bool split_equalities = false);

  /// F and grad F; false on nonfinite oracle output.  Increments the
  /// gradient-evaluation counter by 1.
  bool eval(const Vec& x, double& F, Vec& grad) const;

  /// SmoothEval view onto eval() for the inner solvers.
  SmoothEval oracle() const;

  /// Multiplier estimates at x: y over inequality/bilateral rows (signed
  /// for two-sided rows), y_eq over equality rows.
  void multipliers(const Vec& x, Vec& y, Vec& y_eq) const;

  /// Constraint violation p = max_i dist_[l_i,u_i](c_i(x)) and
  /// complementarity measure s = max over active sides of
  /// min{multiplier, violation of the complement}.
  void measures(const Vec& x, double& p, double& s) const;

  double alpha() const { return alpha_; }
  double mu() const { return mu_; }
  double rho_star() const { return alpha_ / mu_; }
  const ProblemSpec& problem() const { return *prob_; }
  const std::vector<SmoothPenalty>& penalties() const { return penalties_; }

  long long grad_evals() const { return grad_evals_; }
  void reset_grad_evals() { grad_evals_ = 0; }

 private:
  const ProblemSpec* prob_;
  double alpha_, mu_;
  std::vector<SmoothPenalty> penalties_;  // one per constraint row
  mutable long long grad_evals_ = 0;
};

/// -2 m' (mu/alpha) b*(alpha/mu): the infeasibility threshold of the
/// alpha-update rule, with m' = m + 2 m_eq.
double alpha_update_threshold(const Barrier& b, int m_prime, double alpha,
                              double mu);

}  // namespace penbar
