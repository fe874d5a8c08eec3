#include "penbar/prox.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace penbar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox requires gamma > 0");
}

class ZeroProx final : public ProxFriendly {
 public:
  double value(const Vec&) const override { return 0.0; }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    z = x;
    return 0.0;
  }
};

class BoxProx final : public ProxFriendly {
 public:
  BoxProx(Vec l, Vec u) : l_(std::move(l)), u_(std::move(u)) {
    if (l_.size() != u_.size()) throw std::invalid_argument("box: size mismatch");
    for (int i = 0; i < l_.size(); ++i)
      if (!(l_[i] <= u_[i])) throw std::invalid_argument("box: l > u");
  }
  double value(const Vec& x) const override {
    for (int i = 0; i < x.size(); ++i)
      if (x[i] < l_[i] || x[i] > u_[i]) return kInf;
    return 0.0;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    z = x.cwiseMax(l_).cwiseMin(u_);
    return 0.0;
  }

 private:
  Vec l_, u_;
};

class UnitSphereProx final : public ProxFriendly {
 public:
  double value(const Vec& x) const override {
    return std::abs(x.norm() - 1.0) <= 1e-12 ? 0.0 : kInf;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    const double n = x.norm();
    if (n == 0.0) {
      z = Vec::Zero(x.size());
      z[0] = 1.0;
    } else {
      z = x / n;
    }
    return 0.0;
  }
};

class L1Prox final : public ProxFriendly {
 public:
  explicit L1Prox(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l1: lambda >= 0");
  }
  double value(const Vec& x) const override {
    return lambda_ * x.lpNorm<1>();
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    const double th = gamma * lambda_;
    z = x.unaryExpr([th](double v) {
      if (v > th) return v - th;
      if (v < -th) return v + th;
      return 0.0;
    });
    return value(z);
  }

 private:
  double lambda_;
};

class L0Prox final : public ProxFriendly {
 public:
  explicit L0Prox(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("l0: lambda >= 0");
  }
  double value(const Vec& x) const override {
    int nz = 0;
    for (int i = 0; i < x.size(); ++i) nz += x[i] != 0.0;
    return lambda_ * nz;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    // keep strictly above the threshold; the tie goes to 0
    const double th = std::sqrt(2.0 * gamma * lambda_);
    z = x.unaryExpr([th](double v) { return std::abs(v) > th ? v : 0.0; });
    return value(z);
  }

 private:
  double lambda_;
};

class HalfNormProx final : public ProxFriendly {
 public:
  double value(const Vec& x) const override {
    double s = 0.0;
    for (int i = 0; i < x.size(); ++i) s += std::sqrt(std::abs(x[i]));
    return s;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    const double th = 1.5 * std::pow(gamma, 2.0 / 3.0);
    z.resize(x.size());
    for (int i = 0; i < x.size(); ++i) {
      const double v = x[i];
      if (std::abs(v) <= th) {
        z[i] = 0.0;
      } else {
        const double a = -(gamma / 4.0) * std::pow(3.0 / std::abs(v), 1.5);
        z[i] = (2.0 / 3.0) * v * (1.0 + std::cos((2.0 / 3.0) * std::acos(a)));
      }
    }
    return value(z);
  }
};

class NonposProx final : public ProxFriendly {
 public:
  double value(const Vec& x) const override {
    return (x.array() <= 0.0).all() ? 0.0 : kInf;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    z = x.cwiseMin(0.0);
    return 0.0;
  }
};

class SeparableProductProx final : public ProxFriendly {
 public:
  explicit SeparableProductProx(std::vector<std::pair<ProxPtr, int>> parts)
      : parts_(std::move(parts)) {
    for (const auto& [p, sz] : parts_) {
      if (!p || sz <= 0) throw std::invalid_argument("separable product: bad part");
      total_ += sz;
    }
  }
  double value(const Vec& x) const override {
    check(x);
    double s = 0.0;
    int off = 0;
    for (const auto& [p, sz] : parts_) {
      s += p->value(x.segment(off, sz));
      off += sz;
    }
    return s;
  }
  double prox(double gamma, const Vec& x, Vec& z) const override {
    require_gamma(gamma);
    check(x);
    z.resize(x.size());
    double s = 0.0;
    int off = 0;
    Vec zi;
    for (const auto& [p, sz] : parts_) {
      s += p->prox(gamma, x.segment(off, sz), zi);
      z.segment(off, sz) = zi;
      off += sz;
    }
    return s;
  }

 private:
  void check(const Vec& x) const {
    if (x.size() != total_)
      throw std::invalid_argument("separable product: size mismatch");
  }
  std::vector<std::pair<ProxPtr, int>> parts_;
  Eigen::Index total_ = 0;
};

}  // namespace

ProxPtr prox_zero() { return std::make_shared<ZeroProx>(); }
ProxPtr prox_box(Vec l, Vec u) {
  return std::make_shared<BoxProx>(std::move(l), std::move(u));
}
ProxPtr prox_unit_sphere() { return std::make_shared<UnitSphereProx>(); }
ProxPtr prox_l1(double lambda) { return std::make_shared<L1Prox>(lambda); }
ProxPtr prox_l0(double lambda) { return std::make_shared<L0Prox>(lambda); }
ProxPtr prox_halfnorm() { return std::make_shared<HalfNormProx>(); }
ProxPtr prox_nonpos() { return std::make_shared<NonposProx>(); }
ProxPtr prox_separable_product(std::vector<std::pair<ProxPtr, int>> parts) {
  return std::make_shared<SeparableProductProx>(std::move(parts));
}

}  // namespace penbar
