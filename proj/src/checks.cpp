#include "penbar/checks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

#include "penbar/bench.hpp"
#include "penbar/penalty.hpp"
#include "penbar/problem.hpp"

namespace penbar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Barrier> solving_barriers() {
  return {Barrier::inverse_power(1.0), Barrier::inverse_power(2.0),
          Barrier::log_like()};
}

std::vector<Barrier> all_barriers() {
  auto v = solving_barriers();
  v.push_back(Barrier::exponential());
  return v;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i)
    g[i] = std::exp(llo + (lhi - llo) * i / (count - 1));
  return g;
}

// golden-section minimization of a unimodal function on [lo, hi]
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  int iters = 200) {
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// brute-force one-sided envelope: min_{s>=0} rho* s + b(t - s).
// The optimality condition b'(t - s*) <= rho* pins s* <= [t]_+ + |b*'(rho*)|.
double psi_oracle(const Barrier& b, double rho_star, double t, double* slack_out) {
  const auto sigma = [&](double s) {
    const double arg = t - s;
    return arg < 0.0 ? rho_star * s + b.value(arg) : kInf;
  };
  const double scale = 1.0 + std::abs(t);
  const double lo = t >= 0.0 ? t + 1e-13 * scale : 0.0;
  const double hi =
      std::max(0.0, t) + 2.0 * std::abs(b.conjugate_derivative(rho_star)) + 1e-6;
  double s = golden_min(sigma, lo, hi);
  if (t < 0.0 && sigma(0.0) <= sigma(s)) s = 0.0;
  if (slack_out) *slack_out = s;
  return sigma(s);
}

// brute-force bilateral envelope: min_{s>=0} rho* s + b(t-u-s) + b(l-t-s).
// At the optimum the larger barrier slope is at least rho*/2, which bounds
// s* by [max(t-u, l-t)]_+ + |b*'(rho*/2)|.
double psi_bilateral_oracle(const Barrier& b, double rho_star, double l,
                            double u, double t, double* slack_out) {
  const auto sigma = [&](double s) {
    const double a1 = t - u - s, a2 = l - t - s;
    return (a1 < 0.0 && a2 < 0.0) ? rho_star * s + b.value(a1) + b.value(a2)
                                  : kInf;
  };
  const double floor = std::max({t - u, l - t, 0.0});
  const double scale = 1.0 + std::abs(t) + std::abs(l) + std::abs(u);
  const double lo = floor + 1e-13 * scale;
  const double hi = floor +
                    2.0 * std::abs(b.conjugate_derivative(rho_star / 2.0)) +
                    1e-6;
  double s = golden_min(sigma, lo, hi);
  if (floor == 0.0 && t - u < 0.0 && l - t < 0.0 && sigma(0.0) <= sigma(s))
    s = 0.0;
  if (slack_out) *slack_out = s;
  return sigma(s);
}

struct Battery {
  std::vector<CheckResult> results;
  void add(const std::string& name, bool pass, const std::string& detail = {}) {
    results.push_back({name, pass, detail});
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

void check_conjugate_identity(Battery& out, double perturbation) {
  const auto taus = log_grid(1e-4, 1e4, 100);
  for (const Barrier& b : all_barriers()) {
    double worst = 0.0;
    for (double tau : taus) {
      const double lhs = b.conjugate(tau) + perturbation;
      const double t = b.conjugate_derivative(tau);
      const double rhs = t * tau - b.value(t);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
    }
    out.add("conjugate identity [" + b.id() + "]", worst <= 1e-8,
            "max rel err " + fmt(worst));
  }
}

void check_conjugate_derivative_inverse(Battery& out) {
  const auto taus = log_grid(1e-4, 1e4, 100);
  for (const Barrier& b : all_barriers()) {
    double worst = 0.0;
    for (double tau : taus) {
      const double t = b.conjugate_derivative(tau);
      worst = std::max(worst, std::abs(b.derivative(t) - tau) / tau);
    }
    out.add("b*' inverts b' [" + b.id() + "]", worst <= 1e-8,
            "max rel err " + fmt(worst));
  }
}

void check_bstar_over_tau(Battery& out) {
  const auto taus = log_grid(1e-3, 1e8, 120);
  for (const Barrier& b : all_barriers()) {
    bool increasing = true, negative = true;
    double prev = -kInf;
    for (double tau : taus) {
      const double v = b.conjugate(tau) / tau;
      if (v >= 0.0) negative = false;
      if (v <= prev) increasing = false;
      prev = v;
    }
    // the 1e-3-at-1e8 tail bound holds for the table's solving barriers;
    // inverse_p with p > 1 and exp vanish too slowly for it
    bool tail_ok = true;
    std::string tail;
    const bool tail_applies =
        (b.kind() == Barrier::Kind::InversePower && b.power() == 1.0) ||
        b.kind() == Barrier::Kind::LogLike;
    if (tail_applies) {
      const double at8 = b.conjugate(1e8) / 1e8;
      tail_ok = std::abs(at8) <= 1e-3;
      tail = ", |b*/t| at 1e8 = " + fmt(std::abs(at8));
    }
    out.add("b*/t* monotone to 0 [" + b.id() + "]",
            increasing && negative && tail_ok,
            std::string(increasing ? "increasing" : "NOT increasing") + tail);
  }
}

void check_barrier_positivity_fd(Battery& out) {
  const auto ts = log_grid(1e-6, 1e4, 200);
  for (const Barrier& b : all_barriers()) {
    bool positive = true;
    double worst_fd = 0.0;
    for (double h : ts) {
      const double t = -h;
      if (!(b.value(t) > 0.0) || !(b.derivative(t) > 0.0) ||
          !(b.second_derivative(t) > 0.0))
        positive = false;
      const double step = 1e-6 * h;
      if (t + step >= 0.0) continue;
      const double vp = b.value(t + step), vm = b.value(t - step);
      if (!std::isfinite(vp) || !std::isfinite(vm)) continue;  // exp overflow
      const double fd = (vp - vm) / (2.0 * step);
      const double d = b.derivative(t);
      worst_fd = std::max(worst_fd, std::abs(fd - d) / std::max(1.0, std::abs(d)));
    }
    out.add("barrier positivity + derivative FD [" + b.id() + "]",
            positive && worst_fd <= 1e-5, "max FD rel err " + fmt(worst_fd));
  }
}

void check_bruteforce_conjugate(Battery& out) {
  const auto taus = log_grid(0.05, 50.0, 20);
  for (const Barrier& b : all_barriers()) {
    double worst = 0.0;
    for (double tau : taus) {
      // sup_t { tau t - b(t) } over a fine grid refined around the maximizer
      const auto neg = [&](double t) { return -(tau * t - b.value(t)); };
      double best_t = -1.0;
      double best = neg(best_t);
      for (double e = -8.0; e <= 8.0; e += 0.01) {
        const double t = -std::pow(2.0, e);
        const double v = neg(t);
        if (v < best) { best = v; best_t = t; }
      }
      const double t_ref = golden_min(neg, best_t * 1.5, best_t * 0.5);
      const double sup = tau * t_ref - b.value(t_ref);
      worst = std::max(worst, std::abs(sup - b.conjugate(tau)));
    }
    out.add("brute-force conjugate [" + b.id() + "]", worst <= 1e-5,
            "max abs err " + fmt(worst));
  }
}

void check_kappa_profiles(Battery& out) {
  bool ok = true;
  std::ostringstream detail;
  for (double theta : {0.25, 0.5, 0.75}) {
    const double inv_expect = 1.0 / (theta * theta);
    const Barrier inv = Barrier::inverse_power(1.0);
    const Barrier ll = Barrier::log_like();
    const double k_inv = inv.behavior_profile(theta, ProfileMode::Asymptotic);
    const double k_inv_max = inv.behavior_profile(theta, ProfileMode::Max);
    const double k_ll = ll.behavior_profile(theta, ProfileMode::Asymptotic);
    const double k_ll_max = ll.behavior_profile(theta, ProfileMode::Max);
    if (std::abs(k_inv - inv_expect) > 1e-3) ok = false;
    if (std::abs(k_inv_max - inv_expect) > 1e-3) ok = false;
    if (std::abs(k_ll - 1.0 / theta) > 1e-3) ok = false;
    if (std::abs(k_ll_max - inv_expect) > 1e-3) ok = false;
    detail << " theta=" << theta << ": inv " << fmt(k_inv) << ", loglike "
           << fmt(k_ll) << ";";
  }
  const double k_exp =
      Barrier::exponential().behavior_profile(0.5, ProfileMode::Asymptotic);
  if (k_exp != kInf) ok = false;
  out.add("kappa profiles vs table", ok, detail.str());
}

void check_psi_oracles(Battery& out, int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto barriers = solving_barriers();

  double worst_one = 0.0, worst_bi = 0.0, worst_split = 0.0, worst_deriv = 0.0;
  int fallback_engaged = 0;
  for (int cs = 0; cs < cases; ++cs) {
    const Barrier& b = barriers[cs % barriers.size()];
    const double rho_star = std::pow(10.0, -1.0 + 4.0 * unif(rng));  // [0.1, 1000]
    double l = -3.0 + 6.0 * unif(rng);
    double u = -3.0 + 6.0 * unif(rng);
    if (l > u) std::swap(l, u);
    if (unif(rng) < 0.3) u = l;  // equality rows
    const double t = l - 3.0 + (u - l + 6.0) * unif(rng);

    // one-sided
    {
      const double got = psi_value(b, rho_star, t);
      const double want = psi_oracle(b, rho_star, t, nullptr);
      worst_one = std::max(worst_one,
                           std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
    // bilateral value + envelope derivative from the oracle slack
    {
      const double got = psi_bilateral_value(b, rho_star, l, u, t);
      double s_oracle = 0.0;
      const double want = psi_bilateral_oracle(b, rho_star, l, u, t, &s_oracle);
      worst_bi = std::max(worst_bi,
                          std::abs(got - want) / std::max(1.0, std::abs(want)));
      const double d_got = psi_bilateral_derivative(b, rho_star, l, u, t);
      const double d_want =
          b.derivative(t - u - s_oracle) - b.derivative(l - t - s_oracle);
      worst_deriv = std::max(
          worst_deriv, std::abs(d_got - d_want) / std::max(1.0, std::abs(d_want)));
      if (!bilateral_closed_form_agrees(b, rho_star, l, u, t)) ++fallback_engaged;
    }
    // split = sum of two one-sided envelopes
    {
      const double got = psi_split_value(b, rho_star, l, u, t);
      const double want = psi_oracle(b, rho_star, t - u, nullptr) +
                          psi_oracle(b, rho_star, l - t, nullptr);
      worst_split = std::max(
          worst_split, std::abs(got - want) / std::max(1.0, std::abs(want)));
    }
  }
  out.add("psi one-sided vs oracle", worst_one <= 1e-6,
          "max rel err " + fmt(worst_one));
  out.add("psi bilateral vs oracle", worst_bi <= 1e-6,
          "max rel err " + fmt(worst_bi) + ", closed-form fallback on " +
              std::to_string(fallback_engaged) + "/" + std::to_string(cases) +
              " cases");
  out.add("psi bilateral derivative vs oracle slack", worst_deriv <= 1e-6,
          "max rel err " + fmt(worst_deriv));
  out.add("psi split vs oracle", worst_split <= 1e-6,
          "max rel err " + fmt(worst_split));
}

void check_psi_derivative_fd(Battery& out) {
  double worst = 0.0;
  for (const Barrier& b : solving_barriers()) {
    for (double rho_star : {0.5, 1.0, 4.0, 64.0}) {
      const double bp = b.conjugate_derivative(rho_star);
      for (double t = -3.0; t <= 3.0; t += 0.05) {
        const double h = 1e-6 * (1.0 + std::abs(t));
        if (std::abs(t - bp) < 1e-3) continue;  // keep clear of the breakpoint
        const double fd =
            (psi_value(b, rho_star, t + h) - psi_value(b, rho_star, t - h)) /
            (2.0 * h);
        const double d = psi_derivative(b, rho_star, t);
        worst = std::max(worst, std::abs(fd - d) / std::max(1.0, std::abs(d)));

        for (const auto& [l, u] : std::vector<std::pair<double, double>>{
                 {0.0, 0.0}, {0.0, 2.0}, {-1.0, 1.5}}) {
          const double sl = psi_bilateral_slack(b, rho_star, l, u, t);
          if (sl < 1e-3) continue;  // kink where the slack hits zero
          const double fd2 = (psi_bilateral_value(b, rho_star, l, u, t + h) -
                              psi_bilateral_value(b, rho_star, l, u, t - h)) /
                             (2.0 * h);
          const double d2 = psi_bilateral_derivative(b, rho_star, l, u, t);
          worst = std::max(worst, std::abs(fd2 - d2) / std::max(1.0, std::abs(d2)));
        }
      }
    }
  }
  out.add("psi derivatives vs finite differences", worst <= 1e-5,
          "max rel err " + fmt(worst));
}

void check_sandwich(Battery& out) {
  bool ok = true;
  double margin = 0.0;
  for (const Barrier& b : solving_barriers()) {
    for (double rho_star : {1.0, 4.0, 16.0, 64.0, 256.0}) {
      for (const auto& [l, u] : std::vector<std::pair<double, double>>{
               {0.0, 0.0}, {0.0, 2.0}, {-1.0, 1.0}, {-0.5, 3.0}}) {
        const double mid = 0.5 * (l + u), r = 0.5 * (u - l);
        for (double tau = -3.0; tau <= 3.0; tau += 0.1) {
          const double value = psi_bilateral_value(b, rho_star, l, u, tau + mid);
          const double lo = psi_value(b, rho_star, std::abs(tau) - r);
          const double hi = 2.0 * psi_value(b, rho_star / 2.0, std::abs(tau) - r);
          const double slop = 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)});
          if (!(lo <= value + slop && value <= hi + slop)) {
            ok = false;
            margin = std::max(margin, std::max(lo - value, value - hi));
          }
        }
      }
    }
  }
  out.add("sandwich inequality", ok, ok ? "holds on full grid"
                                        : "violated by " + fmt(margin));
}

void check_monotone_limits(Battery& out) {
  bool ok = true;
  std::string why;
  const std::vector<double> rhos = {1.0, 4.0, 16.0, 64.0, 256.0};
  for (const Barrier& b : solving_barriers()) {
    for (double t = -3.0; t <= 3.0; t += 0.05) {
      double prev = -kInf, prev_scaled = kInf;
      for (double rho_star : rhos) {
        const double v = psi_value(b, rho_star, t);
        if (v < prev - 1e-12) { ok = false; why = "psi not nondecreasing in rho*"; }
        if (t < 0.0 && v > b.value(t) + 1e-12) { ok = false; why = "psi above b"; }
        const double scaled = v / rho_star;
        if (scaled > prev_scaled + 1e-12) { ok = false; why = "psi/rho* not nonincreasing"; }
        const double plus = std::max(t, 0.0);
        if (scaled < plus - 1e-12) { ok = false; why = "psi/rho* below [t]+"; }
        prev = v;
        prev_scaled = scaled;
      }
      const double rho_max = rhos.back();
      const double gap = psi_value(b, rho_max, t) / rho_max - std::max(t, 0.0);
      if (gap > 2.0 * std::abs(b.conjugate(rho_max)) / rho_max + 1e-12) {
        ok = false;
        why = "psi/rho* limit gap too large";
      }

      // mu psi decreasing to alpha [t]+ at alpha = 1
      double prev_mu = kInf;
      for (double mu : {1.0, 0.25, 0.0625, 0.015625}) {
        const double v = mu * psi_value(b, 1.0 / mu, t);
        if (v > prev_mu + 1e-12) { ok = false; why = "mu psi not nonincreasing"; }
        if (v < std::max(t, 0.0) - 1e-12) { ok = false; why = "mu psi below [t]+"; }
        prev_mu = v;
      }
    }
    // bilateral distance limit
    for (const auto& [l, u] : std::vector<std::pair<double, double>>{
             {0.0, 0.0}, {-1.0, 2.0}}) {
      for (double t = -3.0; t <= 3.0; t += 0.1) {
        double prev_scaled = kInf;
        const double dist =
            std::max({l - t, t - u, 0.0});
        for (double rho_star : rhos) {
          const double scaled = psi_bilateral_value(b, rho_star, l, u, t) / rho_star;
          if (scaled > prev_scaled + 1e-12) { ok = false; why = "psi^[l,u]/rho* not nonincreasing"; }
          if (scaled < dist - 1e-12) { ok = false; why = "psi^[l,u]/rho* below dist"; }
          prev_scaled = scaled;
        }
      }
    }
  }
  out.add("monotone limits (psi, psi/rho*, mu psi, bilateral)", ok, why);
}

void check_derivative_bounds(Battery& out) {
  bool ok = true;
  for (const Barrier& b : solving_barriers()) {
    for (double rho_star : {0.5, 1.0, 16.0, 256.0}) {
      for (double t = -5.0; t <= 5.0; t += 0.05) {
        const double d = psi_derivative(b, rho_star, t);
        if (!(d > 0.0 && d <= rho_star * (1.0 + 1e-12))) ok = false;
        const double d2 = psi_bilateral_derivative(b, rho_star, -1.0, 1.0, t);
        if (!(std::abs(d2) < rho_star * (1.0 + 1e-12))) ok = false;
      }
    }
  }
  out.add("psi derivative ranges", ok);
}

void check_prox_oracles(Battery& out, int cases, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0xABCDEF);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;

  // 1-D brute force: argmin_z g(z) + (z-x)^2/(2 gamma) by scan + refine,
  // with 0 and x as exact candidates (the L0 objective is discontinuous)
  const auto prox_oracle_1d = [&](const std::function<double(double)>& g,
                                  double gamma, double x) {
    const auto obj = [&](double z) {
      return g(z) + (z - x) * (z - x) / (2.0 * gamma);
    };
    double best_z = 0.0, best = obj(0.0);
    const double span = std::abs(x) + 3.0;
    for (double z = -span; z <= span; z += span / 4000.0) {
      const double v = obj(z);
      if (v < best) { best = v; best_z = z; }
    }
    if (obj(x) < best) { best = obj(x); best_z = x; }
    const double w = span / 2000.0;
    const double refined = golden_min(obj, best_z - w, best_z + w);
    return obj(refined) < best ? refined : best_z;
  };

  double worst = 0.0;
  bool prox_ineq_ok = true, fixed_ok = true;
  const auto halfnorm = prox_halfnorm();
  const auto l1 = prox_l1(0.7);
  const auto l0 = prox_l0(0.9);
  for (int cs = 0; cs < cases; ++cs) {
    const double gamma = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    Vec x(1);
    x[0] = 5.0 * normal(rng);
    Vec z;

    const struct {
      const ProxPtr& p;
      std::function<double(double)> g1d;
    } trio[] = {
        {halfnorm, [](double z) { return std::sqrt(std::abs(z)); }},
        {l1, [](double z) { return 0.7 * std::abs(z); }},
        {l0, [](double z) { return z == 0.0 ? 0.0 : 0.9; }},
    };
    for (const auto& [p, g1d] : trio) {
      const double gz = p->prox(gamma, x, z);
      const double zo = prox_oracle_1d(g1d, gamma, x[0]);
      // compare objective values (the prox point may differ at ties)
      const double got = g1d(z[0]) + (z[0] - x[0]) * (z[0] - x[0]) / (2.0 * gamma);
      const double want = g1d(zo) + (zo - x[0]) * (zo - x[0]) / (2.0 * gamma);
      worst = std::max(worst, std::abs(got - want));
      // prox inequality g(p) + ||p-x||^2/(2 gamma) <= g(x)
      if (got > g1d(x[0]) + 1e-10) prox_ineq_ok = false;
      (void)gz;
    }
  }

  // multi-d prox inequality; projections are idempotent and minimizers of
  // the penalty terms are fixed points
  std::vector<ProxPtr> projections = {prox_zero(), prox_unit_sphere(),
                                      prox_nonpos(),
                                      prox_box(Vec::Constant(4, -1.0),
                                               Vec::Constant(4, 2.0))};
  std::vector<ProxPtr> all = projections;
  all.push_back(halfnorm);
  all.push_back(l1);
  all.push_back(l0);
  all.push_back(prox_separable_product({{prox_unit_sphere(), 2},
                                        {prox_l0(0.5), 2}}));
  for (int cs = 0; cs < cases; ++cs) {
    const double gamma = std::pow(10.0, -2.0 + 3.0 * unif(rng));
    Vec x(4);
    for (int i = 0; i < 4; ++i) x[i] = 3.0 * normal(rng);
    for (const auto& p : all) {
      Vec z;
      const double gz = p->prox(gamma, x, z);
      if (std::isfinite(p->value(x)) &&
          gz + (z - x).squaredNorm() / (2.0 * gamma) > p->value(x) + 1e-9)
        prox_ineq_ok = false;
    }
    for (const auto& p : projections) {
      Vec z, z2;
      p->prox(gamma, x, z);
      p->prox(gamma, z, z2);
      if ((z2 - z).norm() > 1e-9 * (1.0 + z.norm())) fixed_ok = false;
    }
    // the origin minimizes the shrinkage penalties
    for (const auto& p : {halfnorm, l1, l0}) {
      Vec z;
      p->prox(gamma, Vec::Zero(4), z);
      if (z.norm() != 0.0) fixed_ok = false;
    }
  }

  out.add("prox vs 1-D brute force", worst <= 1e-6, "max obj err " + fmt(worst));
  out.add("prox inequality", prox_ineq_ok);
  out.add("prox fixed points", fixed_ok);
}

void fd_audit_problem(Battery& out, const std::string& label, const Instance& inst,
                      std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5151);
  std::normal_distribution<double> normal;
  const ProblemSpec& p = inst.problem;

  double worst_f = 0.0, worst_c = 0.0, worst_sub = 0.0;
  const Barrier barrier = Barrier::inverse_power(1.0);
  Subproblem sp(p, barrier, 1.0, 0.5);

  for (int trial = 0; trial < 10; ++trial) {
    Vec x = inst.x0;
    for (int i = 0; i < x.size(); ++i) x[i] += 0.1 * normal(rng);

    double f0;
    Vec grad;
    p.smooth(x, f0, grad);
    double F0;
    Vec gradF;
    sp.eval(x, F0, gradF);

    Vec c0;
    if (p.num_rows() > 0) p.constraints(x, c0);

    for (int i = 0; i < std::min<int>(x.size(), 8); ++i) {
      const double h = 1e-6 * (1.0 + std::abs(x[i]));
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      double fp, fm;
      Vec dummy;
      p.smooth(xp, fp, dummy);
      p.smooth(xm, fm, dummy);
      const double fd = (fp - fm) / (2.0 * h);
      worst_f = std::max(worst_f,
                         std::abs(fd - grad[i]) / std::max(1.0, std::abs(grad[i])));

      double Fp, Fm;
      sp.eval(xp, Fp, dummy);
      sp.eval(xm, Fm, dummy);
      const double fds = (Fp - Fm) / (2.0 * h);
      worst_sub = std::max(
          worst_sub, std::abs(fds - gradF[i]) / std::max(1.0, std::abs(gradF[i])));
    }

    // Jc^T action against FD of c along coordinate directions:
    // (Jc^T e_r)_i = d c_r / d x_i
    if (p.num_rows() > 0) {
      for (int r = 0; r < std::min(3, p.num_rows()); ++r) {
        Vec e = Vec::Zero(p.num_rows());
        e[r] = 1.0;
        Vec jte;
        p.jacobian_t(x, e, jte);
        for (int i = 0; i < std::min<int>(x.size(), 6); ++i) {
          const double h = 1e-6 * (1.0 + std::abs(x[i]));
          Vec xp = x, xm = x, cp, cm;
          xp[i] += h;
          xm[i] -= h;
          p.constraints(xp, cp);
          p.constraints(xm, cm);
          const double fd = (cp[r] - cm[r]) / (2.0 * h);
          worst_c = std::max(
              worst_c, std::abs(fd - jte[i]) / std::max(1.0, std::abs(jte[i])));
        }
      }
    }
  }
  out.add("finite-difference audit [" + label + "]",
          worst_f <= 1e-5 && worst_c <= 1e-5 && worst_sub <= 1e-5,
          "f " + fmt(worst_f) + ", Jc " + fmt(worst_c) + ", subproblem " +
              fmt(worst_sub));
}

void check_convexity_midpoint(Battery& out, std::uint64_t seed) {
  // affine c with convex 1-D sections: mu Psi(c(.)) midpoint convexity
  std::mt19937_64 rng(seed ^ 0x77);
  std::normal_distribution<double> normal;
  bool ok = true;
  const Barrier b = Barrier::inverse_power(1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = normal(rng), c0 = normal(rng);
    const double rho_star = std::pow(4.0, 1 + trial % 4);
    const SmoothPenalty pen(b, rho_star, PenaltyShape::UpperOnly, -kInf, 0.3);
    const auto F = [&](double x) { return 0.5 * pen.value(a * x + c0); };
    for (double x1 = -2.0; x1 <= 2.0; x1 += 0.4)
      for (double x2 = x1 + 0.4; x2 <= 2.0; x2 += 0.4) {
        const double mid = F(0.5 * (x1 + x2));
        if (mid > 0.5 * (F(x1) + F(x2)) + 1e-10) ok = false;
      }
  }
  out.add("midpoint convexity of mu Psi(c(.)) for affine c", ok);
}

}  // namespace

std::vector<CheckResult> run_analytic_checks(const CheckOptions& opts) {
  Battery out;
  check_conjugate_identity(out, opts.conjugate_perturbation);
  check_conjugate_derivative_inverse(out);
  check_bstar_over_tau(out);
  check_barrier_positivity_fd(out);
  check_bruteforce_conjugate(out);
  check_kappa_profiles(out);
  check_psi_oracles(out, opts.psi_oracle_cases, opts.seed);
  check_psi_derivative_fd(out);
  check_sandwich(out);
  check_monotone_limits(out);
  check_derivative_bounds(out);
  check_prox_oracles(out, opts.prox_cases, opts.seed);

  fd_audit_problem(out, "nonneg_pca", gen_nonneg_pca(8, 1.0, 0.5, 3), opts.seed);
  fd_audit_problem(out, "degenerate", gen_degenerate(3), opts.seed);
  fd_audit_problem(out, "eq_qp", gen_eq_qp(2, 3), opts.seed);
  fd_audit_problem(out, "completion",
                   gen_matrix_completion(4, 6, 2, 0.4, 1e-2, 3), opts.seed);
  fd_audit_problem(out, "rosenbrock", gen_rosenbrock(false, 3), opts.seed);
  fd_audit_problem(out, "rosenbrock_eq", gen_rosenbrock(true, 3), opts.seed);

  check_convexity_midpoint(out, opts.seed);
  return out.results;
}

}  // namespace penbar
