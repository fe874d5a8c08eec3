#include "penbar/inner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>

namespace penbar {

namespace {

constexpr double kGammaSeedMin = 1e-12;
constexpr double kGammaSeedMax = 1e12;
constexpr double kGammaFloor = 1e-16;  // backtracking may go below the seed range
constexpr double kSigma = 1e-4;

struct Eval {
  double f = 0.0;
  Vec grad;
  bool ok = false;
};

Eval evaluate(const SmoothEval& F, const Vec& x, long long& count) {
  Eval e;
  ++count;
  e.ok = F(x, e.f, e.grad) && std::isfinite(e.f) && e.grad.allFinite();
  return e;
}

// Limited-memory BFGS on residual pairs, two-loop recursion.
class Lbfgs {
 public:
  explicit Lbfgs(int memory) : memory_(std::max(memory, 1)) {}

  void push(const Vec& s, const Vec& y) {
    const double sy = s.dot(y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) return;  // curvature skip
    if (static_cast<int>(pairs_.size()) == memory_) pairs_.pop_front();
    pairs_.push_back({s, y, 1.0 / sy});
  }

  void clear() { pairs_.clear(); }
  bool empty() const { return pairs_.empty(); }

  Vec apply(const Vec& g) const {
    Vec q = g;
    std::vector<double> alpha(pairs_.size());
    for (int i = static_cast<int>(pairs_.size()) - 1; i >= 0; --i) {
      alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
      q -= alpha[i] * pairs_[i].y;
    }
    const auto& last = pairs_.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
    for (size_t i = 0; i < pairs_.size(); ++i) {
      const double beta = pairs_[i].rho * pairs_[i].y.dot(q);
      q += (alpha[i] - beta) * pairs_[i].s;
    }
    return q;
  }

 private:
  struct Pair {
    Vec s, y;
    double rho;
  };
  int memory_;
  std::deque<Pair> pairs_;
};

double clamp_gamma(double g) {
  return std::clamp(g, kGammaSeedMin, kGammaSeedMax);
}

}  // namespace

Certificate stationarity_residual(const SmoothEval& F, const ProxFriendly& g,
                                  const Vec& x, double gamma) {
  Certificate cert;
  long long evals = 0;
  const Eval at_x = evaluate(F, x, evals);
  if (!at_x.ok) {
    cert.ok = false;
    return cert;
  }
  cert.g_value = g.prox(gamma, x - gamma * at_x.grad, cert.xbar);
  const Eval at_xbar = evaluate(F, cert.xbar, evals);
  if (!at_xbar.ok) {
    cert.ok = false;
    return cert;
  }
  cert.residual = ((x - cert.xbar) / gamma + at_xbar.grad - at_x.grad).norm();
  return cert;
}

namespace {

InnerResult fail(const Vec& x, InnerStatus status, int iters, long long evals,
                 double gamma) {
  InnerResult r;
  r.x = x;
  r.status = status;
  r.iters = iters;
  r.grad_evals = evals;
  r.gamma_final = gamma;
  r.residual = std::numeric_limits<double>::infinity();
  return r;
}

// curvature probe reusing the already-evaluated gradient at x
double probe_gamma(const SmoothEval& F, const Vec& x, const Vec& grad_x,
                   long long& evals) {
  std::mt19937_64 rng(0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> normal;
  Vec d(x.size());
  for (int i = 0; i < d.size(); ++i) d[i] = normal(rng);
  const double dn = d.norm();
  if (dn == 0.0) return 1.0;
  d /= dn;
  const double h = 1e-6 * (1.0 + x.norm());
  const Eval probe = evaluate(F, x + h * d, evals);
  if (!probe.ok) return 1.0;
  const double c = (probe.grad - grad_x).norm() / h;
  return c > 0.0 ? clamp_gamma(1.0 / c) : 1.0;
}

InnerResult solve_spectral(const SmoothEval& F, const ProxFriendly& g,
                           Vec x, const InnerConfig& cfg) {
  long long evals = 0;
  Eval cur = evaluate(F, x, evals);
  if (!cur.ok) return fail(x, InnerStatus::EvalFailure, 0, evals, 0.0);

  double gamma = cfg.gamma_init > 0.0 ? cfg.gamma_init
                                      : probe_gamma(F, x, cur.grad, evals);

  std::deque<double> merits{cur.f + g.value(x)};
  const int memory = std::max(cfg.nonmonotone_memory, 1);

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double reference = *std::max_element(merits.begin(), merits.end());
    Vec xbar;
    for (;;) {
      const double g_at_bar = g.prox(gamma, x - gamma * cur.grad, xbar);
      const Eval cand = evaluate(F, xbar, evals);
      if (!cand.ok) {
        // nonfinite trial: shrink the step unless already at the floor
        if (gamma <= kGammaFloor)
          return fail(x, InnerStatus::EvalFailure, it, evals, gamma);
        gamma *= 0.5;
        continue;
      }

      const double residual =
          ((x - xbar) / gamma + cand.grad - cur.grad).norm();
      if (residual <= cfg.epsilon) {
        InnerResult r;
        r.x = xbar;
        r.residual = residual;
        r.iters = it;
        r.grad_evals = evals;
        r.status = InnerStatus::Converged;
        r.gamma_final = gamma;
        r.g_value = g_at_bar;
        return r;
      }

      const double merit = cand.f + g_at_bar;
      const double decrease = kSigma * (xbar - x).squaredNorm() / (2.0 * gamma);
      const bool floor_hit = gamma <= kGammaFloor;
      if (merit <= reference - decrease || (floor_hit && merit <= reference)) {
        // accept; Barzilai-Borwein seed for the next iteration
        const Vec dx = xbar - x;
        const Vec dg = cand.grad - cur.grad;
        const double sy = dx.dot(dg);
        double next_gamma =
            sy > 1e-30 ? clamp_gamma(dx.squaredNorm() / sy)
                       : std::min(2.0 * gamma, kGammaSeedMax);
        x = xbar;
        cur = cand;
        merits.push_back(merit);
        if (static_cast<int>(merits.size()) > memory) merits.pop_front();
        if (cfg.on_accept) cfg.on_accept(merit, reference);
        gamma = next_gamma;
        break;
      }
      if (floor_hit) {
        // stalled: no acceptable step exists at floating-point resolution
        const Certificate cert = stationarity_residual(F, g, x, gamma);
        evals += 2;
        InnerResult r;
        r.x = cert.ok ? cert.xbar : x;
        r.residual =
            cert.ok ? cert.residual : std::numeric_limits<double>::infinity();
        r.iters = it;
        r.grad_evals = evals;
        r.status = r.residual <= cfg.epsilon ? InnerStatus::Converged
                                             : InnerStatus::MaxIters;
        r.gamma_final = gamma;
        r.g_value = cert.g_value;
        return r;
      }
      gamma *= 0.5;
    }
  }

  // best-effort residual at the final iterate
  const Certificate cert = stationarity_residual(F, g, x, gamma);
  evals += 2;
  InnerResult r;
  r.x = cert.ok ? cert.xbar : x;
  r.residual = cert.ok ? cert.residual : std::numeric_limits<double>::infinity();
  r.iters = cfg.max_iters;
  r.grad_evals = evals;
  r.status = InnerStatus::MaxIters;
  r.gamma_final = gamma;
  r.g_value = cert.g_value;
  return r;
}

InnerResult solve_accelerated(const SmoothEval& F, const ProxFriendly& g,
                              Vec x, const InnerConfig& cfg) {
  long long evals = 0;
  Eval cur = evaluate(F, x, evals);
  if (!cur.ok) return fail(x, InnerStatus::EvalFailure, 0, evals, 0.0);

  double gamma = cfg.gamma_init > 0.0 ? cfg.gamma_init
                                      : probe_gamma(F, x, cur.grad, evals);

  Lbfgs lbfgs(cfg.lbfgs_memory);
  Vec prev_x, prev_residual;
  bool have_prev = false;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    // forward-backward step at the current base point, adapting gamma to
    // the local quadratic upper bound
    Vec xbar;
    double g_at_bar = 0.0;
    Eval at_bar;
    for (;;) {
      g_at_bar = g.prox(gamma, x - gamma * cur.grad, xbar);
      at_bar = evaluate(F, xbar, evals);
      if (!at_bar.ok) {
        if (gamma <= kGammaFloor)
          return fail(x, InnerStatus::EvalFailure, it, evals, gamma);
        gamma *= 0.5;
        lbfgs.clear();
        continue;
      }

      const double residual =
          ((x - xbar) / gamma + at_bar.grad - cur.grad).norm();
      if (residual <= cfg.epsilon) {
        InnerResult r;
        r.x = xbar;
        r.residual = residual;
        r.iters = it;
        r.grad_evals = evals;
        r.status = InnerStatus::Converged;
        r.gamma_final = gamma;
        r.g_value = g_at_bar;
        return r;
      }

      const Vec dx = xbar - x;
      const double bound =
          cur.f + cur.grad.dot(dx) + (1.0 + 1e-9) * dx.squaredNorm() / (2.0 * gamma);
      // absolute cushion keeps rounding noise from collapsing gamma
      const double cushion = 1e-12 * (std::abs(cur.f) + std::abs(at_bar.f));
      if (at_bar.f <= bound + cushion || gamma <= kGammaFloor) break;
      gamma *= 0.5;
      lbfgs.clear();
    }

    const Vec residual_vec = x - xbar;
    if (have_prev) lbfgs.push(x - prev_x, residual_vec - prev_residual);
    prev_x = x;
    prev_residual = residual_vec;
    have_prev = true;

    const double fbe = cur.f + cur.grad.dot(xbar - x) +
                       (xbar - x).squaredNorm() / (2.0 * gamma) + g_at_bar;
    const double required_drop = kSigma * residual_vec.squaredNorm() / (2.0 * gamma);

    bool stepped = false;
    if (!lbfgs.empty()) {
      const Vec dir = -lbfgs.apply(residual_vec);
      double tau = 1.0;
      for (int ls = 0; ls < 6; ++ls, tau *= 0.5) {
        const Vec u = x + (1.0 - tau) * (xbar - x) + tau * dir;
        const Eval at_u = evaluate(F, u, evals);
        if (!at_u.ok) continue;
        Vec ubar;
        const double g_at_ubar = g.prox(gamma, u - gamma * at_u.grad, ubar);
        const double fbe_u = at_u.f + at_u.grad.dot(ubar - u) +
                             (ubar - u).squaredNorm() / (2.0 * gamma) + g_at_ubar;
        if (fbe_u <= fbe - required_drop) {
          x = u;
          cur = at_u;
          stepped = true;
          break;
        }
      }
    }
    if (!stepped) {
      // plain forward-backward fallback
      x = xbar;
      cur = at_bar;
    }
  }

  const Certificate cert = stationarity_residual(F, g, x, gamma);
  evals += 2;
  InnerResult r;
  r.x = cert.ok ? cert.xbar : x;
  r.residual = cert.ok ? cert.residual : std::numeric_limits<double>::infinity();
  r.iters = cfg.max_iters;
  r.grad_evals = evals;
  r.status = InnerStatus::MaxIters;
  r.gamma_final = gamma;
  r.g_value = cert.g_value;
  return r;
}

}  // namespace

double estimate_gamma(const SmoothEval& F, const Vec& x0) {
  long long evals = 0;
  const Eval base = evaluate(F, x0, evals);
  if (!base.ok) return 1.0;
  return probe_gamma(F, x0, base.grad, evals);
}

InnerResult solve_inner(const SmoothEval& F, const ProxFriendly& g,
                        const Vec& x0, const InnerConfig& cfg) {
  Vec x = x0;
  if (!std::isfinite(g.value(x))) {
    Vec z;
    g.prox(1.0, x, z);
    x = z;
  }
  if (cfg.variant == InnerVariant::Accelerated)
    return solve_accelerated(F, g, std::move(x), cfg);
  return solve_spectral(F, g, std::move(x), cfg);
}

}  // namespace penbar
