#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "penbar/prox.hpp"

using namespace penbar;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// 1-D prox oracle: scan then golden-section refine around the best cell
double prox_oracle_1d(const std::function<double(double)>& g, double gamma,
                      double x) {
  const auto obj = [&](double z) {
    return g(z) + (z - x) * (z - x) / (2.0 * gamma);
  };
  const double span = std::abs(x) + 3.0;
  const double step = span / 20000.0;
  double best_z = 0.0, best = obj(0.0);
  for (double z = -span; z <= span; z += step) {
    const double v = obj(z);
    if (v < best) { best = v; best_z = z; }
  }
  double a = best_z - step, b = best_z + step;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = obj(c), fd = obj(d);
  for (int i = 0; i < 120; ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a); fc = obj(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a); fd = obj(d);
    }
  }
  const double z_ref = 0.5 * (a + b);
  return obj(z_ref) < obj(best_z) ? z_ref : best_z;
}
}  // namespace

TEST_CASE("unit sphere prox") {
  Vec z;
  prox_unit_sphere()->prox(1.0, v2(3.0, 4.0), z);
  CHECK(z[0] == doctest::Approx(0.6));
  CHECK(z[1] == doctest::Approx(0.8));
  prox_unit_sphere()->prox(0.5, v2(0.0, 0.0), z);
  CHECK(z[0] == doctest::Approx(1.0));
  CHECK(z[1] == doctest::Approx(0.0));
}

TEST_CASE("half-norm prox examples") {
  Vec z;
  const auto hn = prox_halfnorm();
  hn->prox(1.0, Vec::Zero(1), z);
  CHECK(z[0] == 0.0);

  Vec x(1);
  x[0] = 2.0;
  hn->prox(0.1, x, z);
  const double zo = prox_oracle_1d([](double t) { return std::sqrt(std::abs(t)); },
                                   0.1, 2.0);
  CHECK(z[0] == doctest::Approx(zo).epsilon(1e-5));
  CHECK(z[0] == doctest::Approx(1.9643250537).epsilon(1e-8));

  // just below the threshold everything maps to zero
  x[0] = 1.5 * std::pow(0.1, 2.0 / 3.0) - 1e-9;
  hn->prox(0.1, x, z);
  CHECK(z[0] == 0.0);
}

TEST_CASE("hard thresholding keeps strictly-above values and zeroes ties") {
  const double lambda = 0.9, gamma = 0.5;
  const double th = std::sqrt(2.0 * gamma * lambda);
  const auto p = prox_l0(lambda);
  Vec x(3), z;
  x << th, th + 1e-9, -th;
  p->prox(gamma, x, z);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == x[1]);
  CHECK(z[2] == 0.0);
}

TEST_CASE("soft thresholding") {
  Vec x(3), z;
  x << 2.0, -0.1, -3.0;
  prox_l1(1.0)->prox(0.5, x, z);
  CHECK(z[0] == doctest::Approx(1.5));
  CHECK(z[1] == 0.0);
  CHECK(z[2] == doctest::Approx(-2.5));
}

TEST_CASE("box prox clamps and fixes interior points") {
  Vec l = v2(-1.0, 0.0), u = v2(1.0, kInf);
  const auto box = prox_box(l, u);
  Vec z;
  box->prox(1.0, v2(2.0, -3.0), z);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == 0.0);
  box->prox(1.0, v2(0.2, 5.0), z);
  CHECK(z[0] == 0.2);
  CHECK(z[1] == 5.0);
  CHECK(box->value(v2(0.2, 5.0)) == 0.0);
  CHECK(box->value(v2(2.0, 5.0)) == kInf);
}

TEST_CASE("nonpositive orthant prox") {
  Vec z;
  prox_nonpos()->prox(1.0, v2(0.5, -2.0), z);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == -2.0);
}

TEST_CASE("separable product applies parts blockwise") {
  const auto p = prox_separable_product({{prox_unit_sphere(), 2},
                                         {prox_l1(1.0), 2}});
  Vec x(4), z;
  x << 3.0, 4.0, 2.0, -0.1;
  const double gv = p->prox(0.5, x, z);
  CHECK(z[0] == doctest::Approx(0.6));
  CHECK(z[1] == doctest::Approx(0.8));
  CHECK(z[2] == doctest::Approx(1.5));
  CHECK(z[3] == 0.0);
  CHECK(gv == doctest::Approx(1.5));
  CHECK_THROWS_AS(p->prox(0.5, Vec::Zero(3), z), std::invalid_argument);
}

TEST_CASE("gamma must be positive") {
  Vec z;
  CHECK_THROWS_AS(prox_l1(1.0)->prox(0.0, Vec::Zero(2), z),
                  std::invalid_argument);
  CHECK_THROWS_AS(prox_halfnorm()->prox(-1.0, Vec::Zero(2), z),
                  std::invalid_argument);
}

TEST_CASE("prox inequality and brute-force agreement on random draws") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const struct {
    ProxPtr p;
    std::function<double(double)> g1d;
  } cases[] = {
      {prox_halfnorm(), [](double t) { return std::sqrt(std::abs(t)); }},
      {prox_l1(0.7), [](double t) { return 0.7 * std::abs(t); }},
      {prox_l0(0.9), [](double t) { return t == 0.0 ? 0.0 : 0.9; }},
  };

  for (int cs = 0; cs < 200; ++cs) {
    const double gamma = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    Vec x(1), z;
    x[0] = 5.0 * normal(rng);
    for (const auto& [p, g1d] : cases) {
      p->prox(gamma, x, z);
      const double zo = prox_oracle_1d(g1d, gamma, x[0]);
      const double got = g1d(z[0]) + (z[0] - x[0]) * (z[0] - x[0]) / (2 * gamma);
      const double want = g1d(zo) + (zo - x[0]) * (zo - x[0]) / (2 * gamma);
      CHECK(got <= want + 1e-6);
      // prox inequality
      CHECK(got <= g1d(x[0]) + 1e-10);
    }
  }

  // multi-dimensional prox inequality; idempotence for projections and
  // fixed points at penalty minimizers
  const std::vector<ProxPtr> projections = {
      prox_zero(), prox_unit_sphere(), prox_nonpos(),
      prox_box(Vec::Constant(4, -1.0), Vec::Constant(4, 2.0))};
  std::vector<ProxPtr> all = projections;
  all.insert(all.end(), {prox_halfnorm(), prox_l1(0.7), prox_l0(0.9)});
  for (int cs = 0; cs < 200; ++cs) {
    const double gamma = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    Vec x(4), z, z2;
    for (int i = 0; i < 4; ++i) x[i] = 3.0 * normal(rng);
    for (const auto& p : all) {
      const double gz = p->prox(gamma, x, z);
      if (std::isfinite(p->value(x)))
        CHECK(gz + (z - x).squaredNorm() / (2.0 * gamma) <= p->value(x) + 1e-9);
    }
    for (const auto& p : projections) {
      p->prox(gamma, x, z);
      p->prox(gamma, z, z2);
      CHECK((z2 - z).norm() <= 1e-9 * (1.0 + z.norm()));
    }
    for (const auto& p : {prox_halfnorm(), prox_l1(0.7), prox_l0(0.9)}) {
      p->prox(gamma, Vec::Zero(4), z);
      CHECK(z.norm() == 0.0);
    }
  }
}
