#include "penbar/outer.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "penbar/bench.hpp"

namespace penbar {

std::string to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::EpsKkt: return "ekkt";
    case ExitStatus::MaxOuter: return "max_outer";
    case ExitStatus::TimeLimit: return "time_limit";
    case ExitStatus::EvalFailure: return "eval_failure";
  }
  return "?";
}

void OuterConfig::validate() const {
  if (!(eps_p > 0.0) || !(eps_d > 0.0))
    throw std::invalid_argument("tolerances must be positive");
  if (!(alpha0 > 0.0) || !(mu0 > 0.0))
    throw std::invalid_argument("alpha0 and mu0 must be positive");
  if (!(delta_alpha > 1.0))
    throw std::invalid_argument("delta_alpha must exceed 1");
  if (!(delta_eps > 0.0 && delta_eps < 1.0) ||
      !(delta_mu > 0.0 && delta_mu < 1.0))
    throw std::invalid_argument("delta_eps and delta_mu must lie in (0,1)");
  if (!(kappa_eps > 0.0 && kappa_eps < 1.0))
    throw std::invalid_argument("kappa_eps must lie in (0,1)");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  Barrier::from_id(barrier);  // throws on unknown id
}

RunRecord run(const ProblemSpec& problem, const OuterConfig& cfg, const Vec& x0) {
  cfg.validate();
  problem.validate();

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed_s = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t_start)
        .count();
  };

  const Barrier barrier = Barrier::from_id(cfg.barrier);
  const bool split = cfg.formulation == Formulation::SplitEqualities;
  const int m_prime =
      problem.num_inequality_rows() + 2 * problem.num_equality_rows();

  RunRecord rec;
  rec.config = cfg;
  for (int i = 0; i < problem.num_rows(); ++i)
    if (problem.row_kind(i) != RowKind::Equality)
      rec.row_kinds.push_back(problem.row_kind(i));

  // start in dom g
  Vec x = x0;
  if (!std::isfinite(problem.nonsmooth->value(x))) {
    Vec z;
    problem.nonsmooth->prox(1.0, x, z);
    x = z;
  }

  double alpha = cfg.alpha0, mu = cfg.mu0;
  long long total_grad_evals = 0;

  // eta0: one stationarity certificate at (x0, alpha0, mu0)
  {
    Subproblem sp0(problem, barrier, alpha, mu, split);
    const double gamma0 = cfg.inner.gamma_init > 0.0
                              ? cfg.inner.gamma_init
                              : estimate_gamma(sp0.oracle(), x);
    const Certificate cert =
        stationarity_residual(sp0.oracle(), *problem.nonsmooth, x, gamma0);
    if (!cert.ok) {
      rec.exit.status = ExitStatus::EvalFailure;
      rec.exit.x = x;
      return rec;
    }
    rec.eta0 = cert.residual;
    total_grad_evals += sp0.grad_evals();
  }
  double eps = cfg.eps0 > 0.0 ? std::max(cfg.eps0, cfg.eps_d)
                              : std::max(cfg.eps_d, cfg.kappa_eps * rec.eta0);
  rec.eps0_resolved = eps;

  double gamma_final = 0.0;
  for (int k = 0; k < cfg.max_outer; ++k) {
    const auto t_iter = std::chrono::steady_clock::now();

    Subproblem sp(problem, barrier, alpha, mu, split);
    InnerConfig icfg = cfg.inner;
    icfg.epsilon = eps;
    const InnerResult inner = solve_inner(sp.oracle(), *problem.nonsmooth, x, icfg);
    total_grad_evals += sp.grad_evals();
    if (inner.status == InnerStatus::EvalFailure) {
      rec.exit.status = ExitStatus::EvalFailure;
      rec.exit.x = inner.x;
      return rec;
    }
    x = inner.x;
    gamma_final = inner.gamma_final;

    IterateRecord it;
    it.k = k;
    it.alpha = alpha;
    it.mu = mu;
    it.eps = eps;
    it.inner_iters = inner.iters;
    it.inner_converged = inner.status == InnerStatus::Converged;
    it.threshold = alpha_update_threshold(barrier, m_prime, alpha, mu);
    sp.multipliers(x, it.y, it.y_eq);
    sp.measures(x, it.p, it.s);
    it.x = x;
    it.grad_evals = total_grad_evals;
    it.wall_ms = std::chrono::duration<double, std::milli>(
                     std::chrono::steady_clock::now() - t_iter)
                     .count();
    rec.iterations.push_back(it);

    const bool certified = inner.status == InnerStatus::Converged;
    if (certified && eps <= cfg.eps_d && it.p <= cfg.eps_p && it.s <= cfg.eps_p) {
      rec.exit.status = ExitStatus::EpsKkt;
      rec.exit.x = x;
      rec.exit.y = it.y;
      rec.exit.y_eq = it.y_eq;
      rec.exit.gamma_final = gamma_final;
      double f;
      Vec grad;
      problem.smooth(x, f, grad);
      rec.exit.objective = f + problem.nonsmooth->value(x);
      return rec;
    }

    eps = std::max(cfg.delta_eps * eps, cfg.eps_d);
    if (it.p > std::max(cfg.eps_p, it.threshold)) {
      alpha *= cfg.delta_alpha;
      if (it.s > cfg.eps_p) mu *= cfg.delta_mu;
    } else {
      mu *= cfg.delta_mu;
    }

    if (cfg.time_limit_s > 0.0 && elapsed_s() > cfg.time_limit_s) {
      rec.exit.status = ExitStatus::TimeLimit;
      break;
    }
  }

  if (rec.exit.status != ExitStatus::TimeLimit)
    rec.exit.status = ExitStatus::MaxOuter;
  rec.exit.x = x;
  if (!rec.iterations.empty()) {
    rec.exit.y = rec.iterations.back().y;
    rec.exit.y_eq = rec.iterations.back().y_eq;
  }
  rec.exit.gamma_final = gamma_final;
  double f;
  Vec grad;
  if (problem.smooth(x, f, grad))
    rec.exit.objective = f + problem.nonsmooth->value(x);
  return rec;
}

KktReport kkt_report(const RunRecord& record, const ProblemSpec& problem) {
  KktReport rep;
  const Vec& x = record.exit.x;
  const Barrier barrier = Barrier::from_id(record.config.barrier);
  const bool split = record.config.formulation == Formulation::SplitEqualities;
  const double alpha = record.iterations.empty()
                           ? record.config.alpha0
                           : record.iterations.back().alpha;
  const double mu =
      record.iterations.empty() ? record.config.mu0 : record.iterations.back().mu;

  Subproblem sp(problem, barrier, alpha, mu, split);
  const double gamma = record.exit.gamma_final > 0.0 ? record.exit.gamma_final
                                                     : estimate_gamma(sp.oracle(), x);
  const Certificate cert =
      stationarity_residual(sp.oracle(), *problem.nonsmooth, x, gamma);
  rep.residual = cert.ok ? cert.residual : std::numeric_limits<double>::infinity();
  rep.dual_stationarity = cert.ok && rep.residual <= record.config.eps_d;

  double p, s;
  sp.measures(x, p, s);
  rep.p = p;
  rep.s = s;
  rep.primal_feasibility = p <= record.config.eps_p;
  rep.complementarity = s <= record.config.eps_p;

  rep.dual_feasibility = true;
  int ii = 0;
  for (int i = 0; i < problem.num_rows(); ++i) {
    const RowKind kind = problem.row_kind(i);
    if (kind == RowKind::Equality) continue;  // not sign restricted
    const double yi = record.exit.y.size() > ii ? record.exit.y[ii] : 0.0;
    ++ii;
    if (kind == RowKind::TwoSided) continue;  // signed by convention
    if (yi < 0.0) rep.dual_feasibility = false;
  }
  return rep;
}

KktReport kkt_report(const RunRecord& record) {
  if (!record.instance.has_value())
    throw std::invalid_argument("record carries no instance tag");
  const Instance inst = make_instance(instance_spec_from_tag(*record.instance));
  return kkt_report(record, inst.problem);
}

std::vector<std::string> check_trajectory(const RunRecord& record) {
  std::vector<std::string> violations;
  const auto& its = record.iterations;
  if (its.empty()) return violations;

  const Barrier barrier = Barrier::from_id(record.config.barrier);
  const double eps_p = record.config.eps_p;
  const double slack_trigger_mu = eps_p / barrier.derivative(-eps_p);
  const double delta_rho =
      std::min(record.config.delta_alpha, 1.0 / record.config.delta_mu);

  // theta with kappa_b^max(theta) <= delta_rho, closed form per kind
  double theta = 0.0;
  if (barrier.kind() == Barrier::Kind::InversePower)
    theta = std::pow(delta_rho, -1.0 / (1.0 + barrier.power()));
  else if (barrier.kind() == Barrier::Kind::LogLike)
    theta = std::pow(delta_rho, -0.5);

  const double envelope0 = its.front().threshold;

  for (size_t k = 0; k < its.size(); ++k) {
    const auto& it = its[k];
    const std::string at = " at k=" + std::to_string(it.k);

    // |mu psi'| <= alpha holds up to the closed-form slack oracle's 1e-6
    // first-order-condition tolerance
    const double bound = it.alpha * (1.0 + 2e-6);
    for (int i = 0; i < it.y.size(); ++i) {
      if (std::abs(it.y[i]) > bound)
        violations.push_back("multiplier magnitude exceeds alpha" + at);
      const bool one_sided =
          i < static_cast<int>(record.row_kinds.size()) &&
          record.row_kinds[i] != RowKind::TwoSided;
      if (one_sided && it.y[i] < 0.0)
        violations.push_back("negative multiplier on one-sided row" + at);
    }
    for (int i = 0; i < it.y_eq.size(); ++i)
      if (std::abs(it.y_eq[i]) > bound)
        violations.push_back("equality multiplier exceeds alpha" + at);

    if (k > 0) {
      const auto& prev = its[k - 1];
      if (it.alpha < prev.alpha)
        violations.push_back("alpha decreased" + at);
      if (it.mu > prev.mu) violations.push_back("mu increased" + at);
      if (it.eps > prev.eps * (1.0 + 1e-12))
        violations.push_back("eps increased" + at);
      if (it.eps < record.config.eps_d * (1.0 - 1e-12))
        violations.push_back("eps fell below eps_d" + at);
      const bool alpha_changed = it.alpha != prev.alpha;
      const bool mu_changed = it.mu != prev.mu;
      if (!alpha_changed && !mu_changed)
        violations.push_back("neither alpha nor mu changed" + at);
      if (it.threshold > prev.threshold * (1.0 + 1e-12))
        violations.push_back("threshold not monotone" + at);
    }

    if (it.mu <= slack_trigger_mu && it.s > eps_p * (1.0 + 1e-9))
      violations.push_back("small-mu slackness guarantee violated" + at);

    // R-linear envelope on alpha-constant steps
    if (theta > 0.0 && k + 1 < its.size() && its[k + 1].alpha == it.alpha) {
      const double bound =
          std::max(eps_p, envelope0 * std::pow(theta, static_cast<double>(k)));
      if (it.p > bound * (1.0 + 1e-9))
        violations.push_back("R-linear infeasibility envelope violated" + at);
    }
  }
  return violations;
}

}  // namespace penbar
