#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

namespace penbar {

using Vec = Eigen::VectorXd;

/// A prox-friendly cost term: evaluation plus an exact proximal mapping
///   prox_{gamma g}(x) = argmin_z { g(z) + ||z - x||^2 / (2 gamma) }.
/// prox() writes the proximal point into z and returns g(z).
/// Implementations must be safe for concurrent read-only use.
class ProxFriendly {
 public:
  virtual ~ProxFriendly() = default;
  virtual double value(const Vec& x) const = 0;
  virtual double prox(double gamma, const Vec& x, Vec& z) const = 0;
};

using ProxPtr = std::shared_ptr<const ProxFriendly>;

/// g = 0.
ProxPtr prox_zero();

/// Indicator of the box [l, u] (entries may be +-inf).
ProxPtr prox_box(Vec l, Vec u);

/// Indicator of the unit sphere ||x|| = 1; prox normalizes, with the
/// first canonical basis vector as the tie-break at x = 0.
ProxPtr prox_unit_sphere();

/// lambda * ||x||_1 (soft thresholding).
ProxPtr prox_l1(double lambda);

/// lambda * ||x||_0 (hard thresholding at sqrt(2 gamma lambda); ties to 0).
ProxPtr prox_l0(double lambda);

/// sum_i sqrt(|x_i|), the half-norm to the 1/2 power; elementwise cosine
/// closed form with threshold (3/2) gamma^(2/3).
ProxPtr prox_halfnorm();

/// Indicator of the nonpositive orthant x <= 0.
ProxPtr prox_nonpos();

/// Blockwise product of separable parts: part k acts on size(k) consecutive
/// entries.
ProxPtr prox_separable_product(std::vector<std::pair<ProxPtr, int>> parts);

}  // namespace penbar
