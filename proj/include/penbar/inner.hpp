#pragma once

#include <functional>

#include "penbar/problem.hpp"

namespace penbar {

enum class InnerVariant { SpectralNonmonotone, Accelerated };

enum class InnerStatus { Converged, MaxIters, EvalFailure };

struct InnerConfig {
  double epsilon = 1e-6;      // target stationarity residual
  int max_iters = 200000;
  double gamma_init = 0.0;    // <= 0: auto curvature probe
  InnerVariant variant = InnerVariant::Accelerated;
  int nonmonotone_memory = 10;
  int lbfgs_memory = 5;

  /// Optional per-accepted-step trace: (merit, nonmonotone reference).
  std::function<void(double merit, double reference)> on_accept;
};

struct InnerResult {
  Vec x;
  double residual = 0.0;
  int iters = 0;
  long long grad_evals = 0;
  InnerStatus status = InnerStatus::MaxIters;
  double gamma_final = 0.0;
  double g_value = 0.0;  // g at the returned point
};

/// Prox-gradient stationarity certificate at x with stepsize gamma:
///   xbar = prox_{gamma g}(x - gamma grad F(x))
///   r    = ||(x - xbar)/gamma + grad F(xbar) - grad F(x)||
/// r bounds dist(0, d(F+g)(xbar)), so r <= eps certifies eps-stationarity
/// at xbar.  Costs two oracle evaluations.
struct Certificate {
  Vec xbar;
  double residual = 0.0;
  double g_value = 0.0;
  bool ok = true;  // false on nonfinite oracle output
};
Certificate stationarity_residual(const SmoothEval& F, const ProxFriendly& g,
                                  const Vec& x, double gamma);

/// Finite-difference curvature probe along a fixed pseudo-random direction;
/// returns a safeguarded initial stepsize.  Costs two oracle evaluations.
double estimate_gamma(const SmoothEval& F, const Vec& x0);

/// Minimizes F + g to an epsilon-stationary point from x0.
///   SpectralNonmonotone: Barzilai-Borwein stepsizes with backtracking on a
///     max-of-recent-merits acceptance test.
///   Accelerated: limited-memory quasi-Newton direction on the fixed-point
///     residual with a forward-backward-envelope line search, falling back
///     to the plain prox-gradient step.
/// Both certify via stationarity_residual; no global Lipschitz constant is
/// required.
InnerResult solve_inner(const SmoothEval& F, const ProxFriendly& g,
                        const Vec& x0, const InnerConfig& cfg);

}  // namespace penbar
