#include "penbar/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace penbar {

RowKind classify_row(double l, double u) {
  const bool lf = std::isfinite(l);
  const bool uf = std::isfinite(u);
  if (lf && uf) return l == u ? RowKind::Equality : RowKind::TwoSided;
  if (uf) return RowKind::UpperOnly;
  if (lf) return RowKind::LowerOnly;
  throw std::invalid_argument("constraint row with no finite bound");
}

int ProblemSpec::num_inequality_rows() const {
  int m = 0;
  for (int i = 0; i < num_rows(); ++i)
    m += row_kind(i) != RowKind::Equality;
  return m;
}

int ProblemSpec::num_equality_rows() const {
  return num_rows() - num_inequality_rows();
}

void ProblemSpec::validate() const {
  if (n <= 0) throw std::invalid_argument("problem dimension must be positive");
  if (!smooth || !nonsmooth) throw std::invalid_argument("missing cost oracles");
  if (lower.size() != upper.size())
    throw std::invalid_argument("bounds size mismatch");
  if (num_rows() > 0 && (!constraints || !jacobian_t))
    throw std::invalid_argument("missing constraint oracles");
  for (int i = 0; i < num_rows(); ++i) {
    if (!(lower[i] <= upper[i]))
      throw std::invalid_argument("constraint row with l > u");
    classify_row(lower[i], upper[i]);  // throws on (-inf, inf) rows
  }
}

namespace {

SmoothPenalty make_row_penalty(const Barrier& barrier, double rho_star,
                               double l, double u, bool split_equalities) {
  switch (classify_row(l, u)) {
    case RowKind::UpperOnly:
      return {barrier, rho_star, PenaltyShape::UpperOnly, l, u};
    case RowKind::LowerOnly:
      return {barrier, rho_star, PenaltyShape::LowerOnly, l, u};
    case RowKind::TwoSided:
      return {barrier, rho_star, PenaltyShape::TwoSided, l, u};
    case RowKind::Equality:
      return {barrier, rho_star,
              split_equalities ? PenaltyShape::SplitTwoSided
                               : PenaltyShape::Equality,
              l, u};
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Subproblem::Subproblem(const ProblemSpec& prob, const Barrier& barrier,
                       double alpha, double mu, bool split_equalities)
    : prob_(&prob), alpha_(alpha), mu_(mu) {
  if (!(alpha > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("alpha and mu must be positive");
  const double rho_star = alpha / mu;
  penalties_.reserve(prob.num_rows());
  for (int i = 0; i < prob.num_rows(); ++i)
    penalties_.push_back(make_row_penalty(barrier, rho_star, prob.lower[i],
                                          prob.upper[i], split_equalities));
}

bool Subproblem::eval(const Vec& x, double& F, Vec& grad) const {
  ++grad_evals_;
  if (!prob_->smooth(x, F, grad)) return false;
  if (penalties_.empty()) return std::isfinite(F) && grad.allFinite();

  Vec c;
  if (!prob_->constraints(x, c)) return false;
  Vec w(c.size());
  for (int i = 0; i < c.size(); ++i) {
    double v, d;
    penalties_[i].eval(c[i], v, d);
    F += mu_ * v;
    w[i] = mu_ * d;
  }
  Vec jtw;
  prob_->jacobian_t(x, w, jtw);
  grad += jtw;
  return std::isfinite(F) && grad.allFinite();
}

SmoothEval Subproblem::oracle() const {
  return [this](const Vec& x, double& F, Vec& grad) {
    return eval(x, F, grad);
  };
}

void Subproblem::multipliers(const Vec& x, Vec& y, Vec& y_eq) const {
  Vec c;
  if (prob_->num_rows() == 0) {
    y.resize(0);
    y_eq.resize(0);
    return;
  }
  prob_->constraints(x, c);
  y.resize(prob_->num_inequality_rows());
  y_eq.resize(prob_->num_equality_rows());
  int ii = 0, ie = 0;
  for (int i = 0; i < c.size(); ++i) {
    const double d = mu_ * penalties_[i].derivative(c[i]);
    if (prob_->row_kind(i) == RowKind::Equality) {
      y_eq[ie++] = d;
    } else if (prob_->row_kind(i) == RowKind::LowerOnly) {
      y[ii++] = -d;  // multiplier of the row in its natural l <= c form
    } else {
      y[ii++] = d;  // signed for two-sided rows
    }
  }
}

void Subproblem::measures(const Vec& x, double& p, double& s) const {
  p = 0.0;
  s = 0.0;
  if (prob_->num_rows() == 0) return;
  Vec c;
  prob_->constraints(x, c);
  for (int i = 0; i < c.size(); ++i) {
    const double l = prob_->lower[i], u = prob_->upper[i];
    const double above = std::isfinite(u) ? std::max(0.0, c[i] - u) : 0.0;
    const double below = std::isfinite(l) ? std::max(0.0, l - c[i]) : 0.0;
    p = std::max(p, std::max(above, below));

    // slackness per active side: min{multiplier, distance to activity}
    double y_up, y_lo;
    penalties_[i].side_derivatives(c[i], y_up, y_lo);
    if (std::isfinite(u))
      s = std::max(s, std::min(mu_ * y_up, std::max(0.0, u - c[i])));
    if (std::isfinite(l))
      s = std::max(s, std::min(mu_ * y_lo, std::max(0.0, c[i] - l)));
  }
}

double alpha_update_threshold(const Barrier& b, int m_prime, double alpha,
                              double mu) {
  return -2.0 * m_prime * (mu / alpha) * b.conjugate(alpha / mu);
}

}  // namespace penbar
