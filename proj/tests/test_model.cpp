#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>

#include "penbar/problem.hpp"

using namespace penbar;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// 1-row scalar problem: f = 0, c(x) = x with the given bounds
ProblemSpec scalar_problem(double l, double u) {
  ProblemSpec p;
  p.n = 1;
  p.smooth = [](const Vec& x, double& f, Vec& grad) {
    (void)x;
    f = 0.0;
    grad = Vec::Zero(1);
    return true;
  };
  p.nonsmooth = prox_zero();
  p.constraints = [](const Vec& x, Vec& c) {
    c = x;
    return true;
  };
  p.jacobian_t = [](const Vec&, const Vec& v, Vec& jtv) { jtv = v; };
  p.lower = Vec::Constant(1, l);
  p.upper = Vec::Constant(1, u);
  return p;
}
}  // namespace

TEST_CASE("row classification") {
  CHECK(classify_row(-kInf, 0.0) == RowKind::UpperOnly);
  CHECK(classify_row(0.0, kInf) == RowKind::LowerOnly);
  CHECK(classify_row(-1.0, 1.0) == RowKind::TwoSided);
  CHECK(classify_row(2.0, 2.0) == RowKind::Equality);
  CHECK_THROWS_AS(classify_row(-kInf, kInf), std::invalid_argument);
}

TEST_CASE("subproblem gradient weights on a one-row problem") {
  const Barrier b = Barrier::inverse_power(1.0);
  ProblemSpec p = scalar_problem(-kInf, 0.0);
  Subproblem sp(p, b, 1.0, 1.0);

  double F;
  Vec grad, x(1);
  x[0] = -2.0;
  CHECK(sp.eval(x, F, grad));
  CHECK(grad[0] == doctest::Approx(0.25).epsilon(1e-12));  // min{1, b'(-2)}
  CHECK(F == doctest::Approx(psi_value(b, 1.0, -2.0)));

  x[0] = 5.0;
  sp.eval(x, F, grad);
  CHECK(grad[0] == doctest::Approx(1.0));  // clipped at alpha

  ProblemSpec peq = scalar_problem(0.0, 0.0);
  Subproblem speq(peq, b, 1.0, 1.0);
  x[0] = 0.0;
  speq.eval(x, F, grad);
  CHECK(grad[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("gradient evaluation counter") {
  ProblemSpec p = scalar_problem(-kInf, 0.0);
  Subproblem sp(p, Barrier::inverse_power(1.0), 1.0, 1.0);
  CHECK(sp.grad_evals() == 0);
  double F;
  Vec grad, x = Vec::Constant(1, -1.0);
  sp.eval(x, F, grad);
  sp.eval(x, F, grad);
  const auto oracle = sp.oracle();
  oracle(x, F, grad);
  CHECK(sp.grad_evals() == 3);
  sp.reset_grad_evals();
  CHECK(sp.grad_evals() == 0);
}

TEST_CASE("multiplier estimates") {
  const Barrier b = Barrier::inverse_power(1.0);
  ProblemSpec p = scalar_problem(-kInf, 0.0);
  Subproblem sp(p, b, 1.0, 1.0);
  Vec y, y_eq, x(1);

  x[0] = -0.5;  // b'(-0.5) = 4, clipped at alpha = 1
  sp.multipliers(x, y, y_eq);
  CHECK(y.size() == 1);
  CHECK(y_eq.size() == 0);
  CHECK(y[0] == doctest::Approx(1.0));

  x[0] = -10.0;
  sp.multipliers(x, y, y_eq);
  CHECK(y[0] == doctest::Approx(0.01).epsilon(1e-12));

  ProblemSpec peq = scalar_problem(0.0, 0.0);
  Subproblem speq(peq, b, 1.0, 1.0);
  x[0] = 0.0;
  speq.multipliers(x, y, y_eq);
  CHECK(y.size() == 0);
  CHECK(y_eq.size() == 1);
  CHECK(y_eq[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("lower-bound rows reflect") {
  const Barrier b = Barrier::inverse_power(1.0);
  ProblemSpec p = scalar_problem(1.0, kInf);  // x >= 1
  Subproblem sp(p, b, 1.0, 1.0);
  Vec y, y_eq, x(1);
  x[0] = 3.0;  // l - x = -2, so y = b'(-2) = 0.25
  sp.multipliers(x, y, y_eq);
  CHECK(y[0] == doctest::Approx(0.25));
  double F;
  Vec grad;
  sp.eval(x, F, grad);
  CHECK(grad[0] == doctest::Approx(-0.25));  // pushes x upward

  double pv, sv;
  sp.measures(x, pv, sv);
  CHECK(pv == 0.0);
  CHECK(sv == doctest::Approx(std::min(0.25, 2.0)));
}

TEST_CASE("measures split two-sided rows by sign") {
  const Barrier b = Barrier::inverse_power(1.0);
  ProblemSpec p = scalar_problem(-1.0, 1.0);
  Subproblem sp(p, b, 4.0, 1.0);
  double pv, sv;
  Vec x(1);

  x[0] = 2.0;  // above the upper bound
  sp.measures(x, pv, sv);
  CHECK(pv == doctest::Approx(1.0));

  x[0] = 0.0;  // midpoint: zero derivative, zero slackness
  sp.measures(x, pv, sv);
  CHECK(pv == 0.0);
  CHECK(sv == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("finite-difference audit of the subproblem gradient") {
  const Barrier b = Barrier::log_like();
  ProblemSpec p;
  p.n = 2;
  p.smooth = [](const Vec& x, double& f, Vec& grad) {
    f = 0.5 * x.squaredNorm() + x[0] * x[1];
    grad = Vec(2);
    grad[0] = x[0] + x[1];
    grad[1] = x[1] + x[0];
    return true;
  };
  p.nonsmooth = prox_zero();
  p.constraints = [](const Vec& x, Vec& c) {
    c = Vec(2);
    c[0] = x[0] * x[0] - x[1];
    c[1] = x[0] + 2.0 * x[1];
    return true;
  };
  p.jacobian_t = [](const Vec& x, const Vec& v, Vec& jtv) {
    jtv = Vec(2);
    jtv[0] = 2.0 * x[0] * v[0] + v[1];
    jtv[1] = -v[0] + 2.0 * v[1];
  };
  p.lower = Vec(2);
  p.upper = Vec(2);
  p.lower << -kInf, -1.0;
  p.upper << 0.5, 1.0;

  Subproblem sp(p, b, 2.0, 0.5);
  Vec x(2);
  x << 0.3, -0.2;
  double F0;
  Vec grad;
  sp.eval(x, F0, grad);
  for (int i = 0; i < 2; ++i) {
    const double h = 1e-6;
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    double Fp, Fm;
    Vec dummy;
    sp.eval(xp, Fp, dummy);
    sp.eval(xm, Fm, dummy);
    const double fd = (Fp - Fm) / (2.0 * h);
    CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("validation rejects malformed problems") {
  ProblemSpec p = scalar_problem(-kInf, 0.0);
  CHECK_NOTHROW(p.validate());
  p.lower[0] = 1.0;  // l > u
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = scalar_problem(-kInf, 0.0);
  p.n = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("split-equality toggle changes the row penalty shape") {
  const Barrier b = Barrier::inverse_power(1.0);
  ProblemSpec peq = scalar_problem(0.0, 0.0);
  Subproblem native(peq, b, 1.0, 1.0, false);
  Subproblem split(peq, b, 1.0, 1.0, true);
  CHECK(native.penalties()[0].shape() == PenaltyShape::Equality);
  CHECK(split.penalties()[0].shape() == PenaltyShape::SplitTwoSided);

  // the split envelope is flat around zero, the combined one is strictly convex
  double Fs0, Fs1, Fn0, Fn1;
  Vec g, x0 = Vec::Zero(1), x1 = Vec::Constant(1, 0.5);
  split.eval(x0, Fs0, g);
  split.eval(x1, Fs1, g);
  native.eval(x0, Fn0, g);
  native.eval(x1, Fn1, g);
  CHECK(Fs0 == doctest::Approx(Fs1));
  CHECK(Fn1 > Fn0 + 1e-6);
}

TEST_CASE("alpha update threshold values") {
  const Barrier b = Barrier::inverse_power(1.0);
  CHECK(alpha_update_threshold(b, 1, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(alpha_update_threshold(b, 1, 1.0, 1e-4) ==
        doctest::Approx(0.04).epsilon(1e-9));
  CHECK(alpha_update_threshold(b, 3, 1.0, 1.0) == doctest::Approx(12.0));
}
