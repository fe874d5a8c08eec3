#include "penbar/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace penbar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double bprime_ext(const Barrier& b, double t) {
  return t < 0.0 ? b.derivative(t) : kInf;
}

// Printed closed-form slack oracles (centered variables: tau = offset from
// the midpoint, r = half-width).  The inverse form is exact; the log-like
// form as printed mixes scalings and only holds at rho_star = 1, which the
// mandatory first-order-condition check catches.
double closed_form_slack(const Barrier& b, double rho_star, double tau,
                         double r, bool& available) {
  available = true;
  switch (b.kind()) {
    case Barrier::Kind::InversePower:
      if (b.power() == 1.0) {
        const double inner =
            std::sqrt(4.0 * tau * tau / rho_star + 1.0 / (rho_star * rho_star));
        return std::max(0.0, std::sqrt(tau * tau + 1.0 / rho_star + inner) - r);
      }
      break;
    case Barrier::Kind::LogLike: {
      const double inner =
          std::sqrt(4.0 * tau * tau / rho_star + tau * tau + 1.0 / rho_star);
      return std::max(
          0.0, std::sqrt(rho_star * tau * tau + rho_star / 4.0 + 1.0 + inner) -
                   0.5 - r);
    }
    default:
      break;
  }
  available = false;
  return 0.0;
}

struct BilateralObjective {
  const Barrier& b;
  double rho_star, l, u, t;

  // s must exceed this for both barrier arguments to be in-domain
  double domain_floor() const { return std::max(t - u, l - t); }

  double slope(double s) const {
    return rho_star - bprime_ext(b, t - u - s) - bprime_ext(b, l - t - s);
  }
  double curvature(double s) const {
    return b.second_derivative(t - u - s) + b.second_derivative(l - t - s);
  }
  bool foc_holds(double s) const {
    if (s <= 0.0) {
      const double floor = domain_floor();
      if (floor >= 0.0) return false;  // s = 0 is not even in-domain
      return slope(0.0) >= -1e-6 * rho_star;
    }
    const double floor = domain_floor();
    if (s <= floor) return false;
    return std::abs(slope(s)) <= 1e-6 * rho_star;
  }
};

// Safeguarded Newton/bisection on the strictly convex marginal objective.
double solve_slack(const BilateralObjective& obj) {
  const double floor = obj.domain_floor();
  if (floor < 0.0 && obj.slope(0.0) >= 0.0) return 0.0;

  // bracket [lo, hi] with slope(lo) < 0 <= slope(hi)
  double lo = std::max(floor, 0.0);
  const double scale = 1.0 + std::abs(obj.t) + std::abs(obj.l) + std::abs(obj.u);
  if (floor >= 0.0) lo = floor + 1e-14 * scale;
  double hi = lo + scale;
  for (int i = 0; i < 200 && obj.slope(hi) < 0.0; ++i) hi = lo + 2.0 * (hi - lo);

  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double g = obj.slope(s);
    if (std::abs(g) <= 1e-13 * obj.rho_star) break;
    if (g < 0.0) lo = s; else hi = s;
    if (hi - lo <= 1e-15 * (1.0 + std::abs(s))) break;
    double next = s - g / obj.curvature(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  return std::max(s, 0.0);
}

void require_bilateral(double rho_star, double l, double u) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("rho_star must be > 0");
  if (!(l <= u) || !std::isfinite(l) || !std::isfinite(u))
    throw std::invalid_argument("bilateral penalty requires finite l <= u");
}

}  // namespace

double psi_value(const Barrier& b, double rho_star, double t) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("rho_star must be > 0");
  const double rho = b.conjugate_derivative(rho_star);
  if (t <= rho) return b.value(t);
  return rho_star * t - b.conjugate(rho_star);
}

double psi_derivative(const Barrier& b, double rho_star, double t) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("rho_star must be > 0");
  return std::min(bprime_ext(b, t), rho_star);
}

double marginal_slack(const Barrier& b, double rho_star, double t) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("rho_star must be > 0");
  return std::max(0.0, t - b.conjugate_derivative(rho_star));
}

double psi_bilateral_slack(const Barrier& b, double rho_star, double l,
                           double u, double t) {
  require_bilateral(rho_star, l, u);
  const BilateralObjective obj{b, rho_star, l, u, t};
  bool available = false;
  const double s =
      closed_form_slack(b, rho_star, t - 0.5 * (l + u), 0.5 * (u - l), available);
  if (available && obj.foc_holds(s)) return s;
  return solve_slack(obj);
}

double psi_bilateral_value(const Barrier& b, double rho_star, double l,
                           double u, double t) {
  const double s = psi_bilateral_slack(b, rho_star, l, u, t);
  return rho_star * s + b.value(t - u - s) + b.value(l - t - s);
}

double psi_bilateral_derivative(const Barrier& b, double rho_star, double l,
                                double u, double t) {
  const double s = psi_bilateral_slack(b, rho_star, l, u, t);
  return b.derivative(t - u - s) - b.derivative(l - t - s);
}

double psi_split_value(const Barrier& b, double rho_star, double l, double u,
                       double t) {
  return psi_value(b, rho_star, t - u) + psi_value(b, rho_star, l - t);
}

double psi_split_derivative(const Barrier& b, double rho_star, double l,
                            double u, double t) {
  return psi_derivative(b, rho_star, t - u) - psi_derivative(b, rho_star, l - t);
}

bool bilateral_closed_form_agrees(const Barrier& b, double rho_star, double l,
                                  double u, double t) {
  require_bilateral(rho_star, l, u);
  bool available = false;
  const double s =
      closed_form_slack(b, rho_star, t - 0.5 * (l + u), 0.5 * (u - l), available);
  if (!available) return false;
  return BilateralObjective{b, rho_star, l, u, t}.foc_holds(s);
}

SmoothPenalty::SmoothPenalty(Barrier b, double rho_star, PenaltyShape shape,
                             double l, double u)
    : barrier_(std::move(b)),
      rho_star_(rho_star),
      rho_(barrier_.conjugate_derivative(rho_star)),
      bstar_(barrier_.conjugate(rho_star)),
      shape_(shape),
      l_(l),
      u_(u) {
  if (!(rho_star > 0.0)) throw std::invalid_argument("rho_star must be > 0");
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      if (!std::isfinite(u_)) throw std::invalid_argument("upper bound must be finite");
      break;
    case PenaltyShape::LowerOnly:
      if (!std::isfinite(l_)) throw std::invalid_argument("lower bound must be finite");
      break;
    case PenaltyShape::TwoSided:
      require_bilateral(rho_star, l_, u_);
      if (!(l_ < u_)) throw std::invalid_argument("two-sided requires l < u");
      break;
    case PenaltyShape::Equality:
      require_bilateral(rho_star, l_, u_);
      if (l_ != u_) throw std::invalid_argument("equality requires l == u");
      break;
    case PenaltyShape::SplitTwoSided:
      require_bilateral(rho_star, l_, u_);
      break;
  }
}

double SmoothPenalty::one_sided(double t) const {
  if (t <= rho_) return barrier_.value(t);
  return rho_star_ * t - bstar_;
}

double SmoothPenalty::one_sided_derivative(double t) const {
  return std::min(bprime_ext(barrier_, t), rho_star_);
}

double SmoothPenalty::value(double t) const {
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      return one_sided(t - u_);
    case PenaltyShape::LowerOnly:
      return one_sided(l_ - t);
    case PenaltyShape::TwoSided:
    case PenaltyShape::Equality: {
      const double s = slack(t);
      return rho_star_ * s + barrier_.value(t - u_ - s) + barrier_.value(l_ - t - s);
    }
    case PenaltyShape::SplitTwoSided:
      return one_sided(t - u_) + one_sided(l_ - t);
  }
  return 0.0;
}

double SmoothPenalty::derivative(double t) const {
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      return one_sided_derivative(t - u_);
    case PenaltyShape::LowerOnly:
      return -one_sided_derivative(l_ - t);
    case PenaltyShape::TwoSided:
    case PenaltyShape::Equality: {
      const double s = slack(t);
      return barrier_.derivative(t - u_ - s) - barrier_.derivative(l_ - t - s);
    }
    case PenaltyShape::SplitTwoSided:
      return one_sided_derivative(t - u_) - one_sided_derivative(l_ - t);
  }
  return 0.0;
}

void SmoothPenalty::eval(double t, double& value, double& derivative) const {
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      value = one_sided(t - u_);
      derivative = one_sided_derivative(t - u_);
      return;
    case PenaltyShape::LowerOnly:
      value = one_sided(l_ - t);
      derivative = -one_sided_derivative(l_ - t);
      return;
    case PenaltyShape::TwoSided:
    case PenaltyShape::Equality: {
      const double s = slack(t);
      value = rho_star_ * s + barrier_.value(t - u_ - s) + barrier_.value(l_ - t - s);
      derivative = barrier_.derivative(t - u_ - s) - barrier_.derivative(l_ - t - s);
      return;
    }
    case PenaltyShape::SplitTwoSided:
      value = one_sided(t - u_) + one_sided(l_ - t);
      derivative = one_sided_derivative(t - u_) - one_sided_derivative(l_ - t);
      return;
  }
}

double SmoothPenalty::slack(double t) const {
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      return std::max(0.0, t - u_ - rho_);
    case PenaltyShape::LowerOnly:
      return std::max(0.0, l_ - t - rho_);
    case PenaltyShape::TwoSided:
    case PenaltyShape::Equality: {
      const BilateralObjective obj{barrier_, rho_star_, l_, u_, t};
      bool available = false;
      const double s = closed_form_slack(barrier_, rho_star_,
                                         t - 0.5 * (l_ + u_), 0.5 * (u_ - l_),
                                         available);
      if (available && obj.foc_holds(s)) return s;
      return solve_slack(obj);
    }
    case PenaltyShape::SplitTwoSided:
      return std::max(0.0, t - u_ - rho_) + std::max(0.0, l_ - t - rho_);
  }
  return 0.0;
}

void SmoothPenalty::side_derivatives(double t, double& upper, double& lower) const {
  switch (shape_) {
    case PenaltyShape::UpperOnly:
      upper = one_sided_derivative(t - u_);
      lower = 0.0;
      return;
    case PenaltyShape::LowerOnly:
      upper = 0.0;
      lower = one_sided_derivative(l_ - t);
      return;
    case PenaltyShape::TwoSided:
    case PenaltyShape::Equality: {
      const double d = derivative(t);
      upper = std::max(d, 0.0);
      lower = std::max(-d, 0.0);
      return;
    }
    case PenaltyShape::SplitTwoSided:
      upper = one_sided_derivative(t - u_);
      lower = one_sided_derivative(l_ - t);
      return;
  }
}

}  // namespace penbar
