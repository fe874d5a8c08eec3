#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <vector>

#include "penbar/barrier.hpp"

using namespace penbar;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return g;
}

std::vector<Barrier> all_kinds() {
  return {Barrier::inverse_power(1.0), Barrier::inverse_power(2.0),
          Barrier::log_like(), Barrier::exponential()};
}
}  // namespace

TEST_CASE("barrier values") {
  const Barrier inv = Barrier::inverse_power(1.0);
  CHECK(inv.value(-2.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(inv.value(0.5) == kInf);
  CHECK(inv.value(0.0) == kInf);
  CHECK(Barrier::log_like().value(-1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("barrier derivatives with finite-difference cross-check") {
  const Barrier inv = Barrier::inverse_power(1.0);
  auto [d1, d2] = std::pair{inv.derivative(-2.0), inv.second_derivative(-2.0)};
  CHECK(d1 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d2 == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(inv.derivative(-1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(Barrier::log_like().derivative(-1.0) ==
        doctest::Approx(0.5).epsilon(1e-12));

  for (const Barrier& b : all_kinds()) {
    for (double t : {-2.0, -0.7, -0.05}) {
      const double h = 1e-6 * std::abs(t);
      const double fd = (b.value(t + h) - b.value(t - h)) / (2.0 * h);
      CHECK(b.derivative(t) == doctest::Approx(fd).epsilon(1e-5));
      const double fd2 = (b.derivative(t + h) - b.derivative(t - h)) / (2.0 * h);
      CHECK(b.second_derivative(t) == doctest::Approx(fd2).epsilon(1e-5));
    }
  }
}

TEST_CASE("conjugates") {
  const Barrier inv = Barrier::inverse_power(1.0);
  CHECK(inv.conjugate(4.0) == doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(Barrier::log_like().conjugate(0.0) == 0.0);
  // brute-force: sup_{t<0} { t - b(t) } attained at t = -1
  CHECK(inv.conjugate(1.0) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(inv.conjugate(-0.5) == kInf);
}

TEST_CASE("conjugate derivatives") {
  const Barrier inv = Barrier::inverse_power(1.0);
  CHECK(inv.conjugate_derivative(4.0) == doctest::Approx(-0.5).epsilon(1e-12));
  // identity cross-check b*(4) = b*'(4)*4 - b(b*'(4)) = -2 - 2
  CHECK(inv.conjugate_derivative(4.0) * 4.0 -
            inv.value(inv.conjugate_derivative(4.0)) ==
        doctest::Approx(-4.0).epsilon(1e-12));
  CHECK(inv.conjugate_derivative(1.0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(Barrier::log_like().conjugate_derivative(0.5) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("positivity and derivative consistency on the log grid") {
  for (const Barrier& b : all_kinds()) {
    for (double h : log_grid(1e-6, 1e4, 200)) {
      const double t = -h;
      CHECK(b.value(t) > 0.0);
      CHECK(b.derivative(t) > 0.0);
      CHECK(b.second_derivative(t) > 0.0);
      const double step = 1e-6 * h;
      const double vp = b.value(t + step), vm = b.value(t - step);
      if (!std::isfinite(vp) || !std::isfinite(vm)) continue;  // exp overflow near 0
      const double fd = (vp - vm) / (2.0 * step);
      const double d = b.derivative(t);
      CHECK(std::abs(fd - d) <= 1e-5 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("conjugate identity and inverse relation on the tau grid") {
  for (const Barrier& b : all_kinds()) {
    for (double tau : log_grid(1e-4, 1e4, 100)) {
      const double t = b.conjugate_derivative(tau);
      CHECK(t < 0.0);
      const double identity = t * tau - b.value(t);
      CHECK(std::abs(b.conjugate(tau) - identity) <=
            1e-8 * std::max(1.0, std::abs(identity)));
      CHECK(std::abs(b.derivative(t) - tau) <= 1e-8 * tau);
    }
  }
}

TEST_CASE("b*/t* increases to zero and stays negative") {
  for (const Barrier& b : all_kinds()) {
    double prev = -kInf;
    for (double tau : log_grid(1e-3, 1e8, 150)) {
      const double v = b.conjugate(tau) / tau;
      CHECK(v < 0.0);
      CHECK(v > prev);
      prev = v;
    }
  }
  // the tail vanishes like tau^(-1/(1+p)) resp. log(tau)/tau; at tau = 1e8
  // the 1e-3 bound holds for the solving barriers
  CHECK(std::abs(Barrier::inverse_power(1.0).conjugate(1e8) / 1e8) <= 1e-3);
  CHECK(std::abs(Barrier::log_like().conjugate(1e8) / 1e8) <= 1e-3);
}

TEST_CASE("brute-force conjugate matches closed form") {
  for (const Barrier& b : all_kinds()) {
    for (double tau : log_grid(0.05, 50.0, 20)) {
      double sup = -kInf;
      for (double e = -10.0; e <= 10.0; e += 0.001) {
        const double t = -std::pow(2.0, e);
        sup = std::max(sup, tau * t - b.value(t));
      }
      CHECK(std::abs(sup - b.conjugate(tau)) <= 1e-5);
    }
  }
}

TEST_CASE("behavior profiles match the table") {
  const Barrier inv = Barrier::inverse_power(1.0);
  CHECK(inv.behavior_profile(0.5, ProfileMode::Asymptotic) ==
        doctest::Approx(4.0).epsilon(1e-6));
  CHECK(Barrier::log_like().behavior_profile(0.5, ProfileMode::Asymptotic) ==
        doctest::Approx(2.0).epsilon(1e-3));
  CHECK(Barrier::exponential().behavior_profile(0.5, ProfileMode::Asymptotic) ==
        kInf);

  for (double theta : {0.25, 0.5, 0.75}) {
    const double sq = 1.0 / (theta * theta);
    CHECK(std::abs(inv.behavior_profile(theta, ProfileMode::Asymptotic) - sq) <=
          1e-3);
    CHECK(std::abs(inv.behavior_profile(theta, ProfileMode::Max) - sq) <= 1e-3);
    CHECK(std::abs(Barrier::log_like().behavior_profile(
                       theta, ProfileMode::Asymptotic) -
                   1.0 / theta) <= 1e-3);
    CHECK(std::abs(Barrier::log_like().behavior_profile(theta, ProfileMode::Max) -
                   sq) <= 1e-3);
  }
  // kappa of inverse-power scales as (1/theta)^(1+p)
  CHECK(Barrier::inverse_power(2.0).behavior_profile(0.5, ProfileMode::Asymptotic) ==
        doctest::Approx(8.0).epsilon(1e-6));
}

TEST_CASE("domain errors") {
  const Barrier inv = Barrier::inverse_power(1.0);
  CHECK_THROWS_AS(inv.derivative(0.0), std::domain_error);
  CHECK_THROWS_AS(inv.derivative(1.0), std::domain_error);
  CHECK_THROWS_AS(inv.second_derivative(0.5), std::domain_error);
  CHECK_THROWS_AS(inv.conjugate_derivative(0.0), std::domain_error);
  CHECK_THROWS_AS(inv.conjugate_derivative(-1.0), std::domain_error);
  CHECK_THROWS_AS(inv.behavior_profile(0.0, ProfileMode::Asymptotic),
                  std::domain_error);
  CHECK_THROWS_AS(inv.behavior_profile(1.0, ProfileMode::Max), std::domain_error);
}

TEST_CASE("barrier ids") {
  CHECK(Barrier::from_id("inverse").kind() == Barrier::Kind::InversePower);
  CHECK(Barrier::from_id("inverse_p:3").power() == doctest::Approx(3.0));
  CHECK(Barrier::from_id("loglike").kind() == Barrier::Kind::LogLike);
  CHECK(Barrier::from_id("exp").kind() == Barrier::Kind::Exponential);
  CHECK_THROWS_AS(Barrier::from_id("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(Barrier::from_id("inverse_p:x"), std::invalid_argument);
  CHECK(Barrier::from_id(Barrier::log_like().id()).kind() ==
        Barrier::Kind::LogLike);
}

TEST_CASE("lambert w") {
  for (double x : {1e-8, 0.1, 0.5, 1.0, 5.0, 100.0, 1e6}) {
    const double w = lambert_w(x);
    CHECK(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, x));
  }
  CHECK(lambert_w(0.0) == 0.0);
}
