#include "penbar/barrier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace penbar {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProfileBlowup = 1e12;
}  // namespace

Barrier Barrier::inverse_power(double p) {
  if (!(p > 0.0)) throw std::invalid_argument("inverse barrier requires p > 0");
  return Barrier(Kind::InversePower, p);
}

Barrier Barrier::log_like() { return Barrier(Kind::LogLike, 1.0); }

Barrier Barrier::exponential() { return Barrier(Kind::Exponential, 1.0); }

Barrier Barrier::from_id(const std::string& id) {
  if (id == "inverse") return inverse_power(1.0);
  if (id == "loglike") return log_like();
  if (id == "exp") return exponential();
  const std::string prefix = "inverse_p:";
  if (id.rfind(prefix, 0) == 0) {
    try {
      const double p = std::stod(id.substr(prefix.size()));
      return inverse_power(p);
    } catch (const std::invalid_argument&) {
      // fall through to the error below
    }
  }
  throw std::invalid_argument("unknown barrier id '" + id +
                              "'; valid: inverse, inverse_p:<p>, loglike, exp");
}

std::string Barrier::id() const {
  switch (kind_) {
    case Kind::InversePower:
      return p_ == 1.0 ? "inverse" : "inverse_p:" + std::to_string(p_);
    case Kind::LogLike:
      return "loglike";
    case Kind::Exponential:
      return "exp";
  }
  return "?";
}

double Barrier::value(double t) const {
  if (t >= 0.0) return kInf;
  switch (kind_) {
    case Kind::InversePower:
      return std::pow(-t, -p_) / p_;
    case Kind::LogLike:
      return std::log1p(-1.0 / t);
    case Kind::Exponential:
      return std::exp(-1.0 / t);
  }
  return kInf;
}

double Barrier::derivative(double t) const {
  if (!(t < 0.0)) throw std::domain_error("barrier derivative requires t < 0");
  switch (kind_) {
    case Kind::InversePower:
      return std::pow(-t, -(p_ + 1.0));
    case Kind::LogLike:
      return 1.0 / (t * t - t);
    case Kind::Exponential:
      return std::exp(-1.0 / t) / (t * t);
  }
  return 0.0;
}

double Barrier::second_derivative(double t) const {
  if (!(t < 0.0)) throw std::domain_error("barrier derivative requires t < 0");
  switch (kind_) {
    case Kind::InversePower:
      return (p_ + 1.0) * std::pow(-t, -(p_ + 2.0));
    case Kind::LogLike: {
      const double d = t * t - t;
      return (1.0 - 2.0 * t) / (d * d);
    }
    case Kind::Exponential:
      return std::exp(-1.0 / t) * (1.0 - 2.0 * t) / (t * t * t * t);
  }
  return 0.0;
}

double Barrier::infimum() const {
  return kind_ == Kind::Exponential ? 1.0 : 0.0;
}

double Barrier::conjugate(double tau) const {
  if (tau < 0.0) return kInf;
  if (tau == 0.0) return -infimum();
  switch (kind_) {
    case Kind::InversePower: {
      const double q = p_ / (1.0 + p_);
      return -std::pow(tau, q) / q;
    }
    case Kind::LogLike: {
      const double s = std::sqrt(tau);
      const double w = std::sqrt(tau + 4.0);
      return -2.0 * (s / (s + w) + std::log1p((s + w - 2.0) / 2.0));
    }
    case Kind::Exponential: {
      const double u = 2.0 * lambert_w(std::sqrt(tau) / 2.0);
      return -(tau / u) * (1.0 + 1.0 / u);
    }
  }
  return kInf;
}

double Barrier::conjugate_derivative(double tau) const {
  if (!(tau > 0.0))
    throw std::domain_error("conjugate derivative requires tau > 0");
  switch (kind_) {
    case Kind::InversePower:
      return -std::pow(tau, -1.0 / (1.0 + p_));
    case Kind::LogLike: {
      // (1 - sqrt(1 + 4/tau)) / 2 without cancellation for large tau
      const double x = 4.0 / tau;
      return -x / (2.0 * (1.0 + std::sqrt(1.0 + x)));
    }
    case Kind::Exponential:
      return -1.0 / (2.0 * lambert_w(std::sqrt(tau) / 2.0));
  }
  return 0.0;
}

double Barrier::behavior_profile(double theta, ProfileMode mode) const {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::domain_error("behavior profile requires theta in (0,1)");

  const auto ratio = [&](double t) { return value(theta * t) / (theta * value(t)); };

  // Asymptotic limit t -> 0-.  The raw ratio converges only like
  // 1/ln(1/|t|) for logarithmic barriers, so the grid values at
  // t = -10^-j are extrapolated linearly in 1/ln(1/|t|).
  const auto asymptotic = [&]() -> double {
    double r_prev = 0.0, l_prev = 0.0;
    double est = kInf;
    bool have_prev = false;
    for (int j = 4; j <= 300; j += 8) {
      const double t = -std::pow(10.0, -j);
      const double r = ratio(t);
      if (!std::isfinite(r)) break;
      if (r > kProfileBlowup) return kInf;
      const double L = j * std::log(10.0);
      if (have_prev) {
        const double slope = (r - r_prev) / (1.0 / L - 1.0 / l_prev);
        est = r - slope / L;
      } else {
        est = r;
      }
      r_prev = r;
      l_prev = L;
      have_prev = true;
    }
    return est;
  };

  const double a = asymptotic();
  if (mode == ProfileMode::Asymptotic) return a;

  // Max mode: sup over all t < 0; sweep a log grid and keep the
  // asymptotic estimate as a lower envelope.
  double sup = a;
  for (double e = 6.0; e >= -12.0; e -= 0.1) {
    const double t = -std::pow(10.0, e);
    const double r = ratio(t);
    if (!std::isfinite(r) || r > kProfileBlowup) return kInf;
    sup = std::max(sup, r);
  }
  return sup;
}

double lambert_w(double x) {
  if (!(x >= 0.0)) throw std::domain_error("lambert_w requires x >= 0");
  if (x == 0.0) return 0.0;
  double w;
  if (x < 1.0) {
    w = x * (1.0 - x);  // series start
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(std::max(l1, 1e-300));
    w = l1 - l2 + l2 / l1;  // Corless-style start for large x
    if (!(w > 0.0)) w = l1;
  }
  for (int it = 0; it < 100; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
    const double step = f / denom;
    w -= step;
    if (std::abs(f) <= 1e-12 * std::max(1.0, x)) break;
  }
  return w;
}

}  // namespace penbar
