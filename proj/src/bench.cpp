#include "penbar/bench.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace penbar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
using Mat = Eigen::MatrixXd;

std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace

InstanceSpec::Family InstanceSpec::family_from_string(const std::string& s) {
  if (s == "nonneg_pca") return Family::NonnegPCA;
  if (s == "completion") return Family::MatrixCompletion;
  if (s == "degenerate") return Family::DegenerateConvex;
  if (s == "eq_qp") return Family::RandomEqQP;
  if (s == "rosenbrock") return Family::NonsmoothRosenbrock;
  if (s == "rosenbrock_eq") return Family::RosenbrockEq;
  throw std::invalid_argument(
      "unknown family '" + s +
      "'; valid: nonneg_pca, completion, degenerate, eq_qp, rosenbrock, "
      "rosenbrock_eq");
}

std::string InstanceSpec::family_to_string(Family f) {
  switch (f) {
    case Family::NonnegPCA: return "nonneg_pca";
    case Family::MatrixCompletion: return "completion";
    case Family::DegenerateConvex: return "degenerate";
    case Family::RandomEqQP: return "eq_qp";
    case Family::NonsmoothRosenbrock: return "rosenbrock";
    case Family::RosenbrockEq: return "rosenbrock_eq";
  }
  return "?";
}

Instance gen_nonneg_pca(int n, double sigma_n, double sigma_s,
                        std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("nonneg_pca requires n >= 2");
  if (!(sigma_n > 0.0)) throw std::invalid_argument("sigma_n must be > 0");
  if (!(sigma_s > 0.0 && sigma_s < 1.0))
    throw std::invalid_argument("sigma_s must lie in (0,1)");

  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;

  // sparse nonnegative unit signal: keep the ceil(sigma_s n) largest
  // magnitudes of a normal draw, take absolute values, normalize
  Vec z = Vec::Zero(n);
  for (int i = 0; i < n; ++i) z[i] = normal(rng);
  const int keep = static_cast<int>(std::ceil(sigma_s * n));
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return std::abs(z[a]) > std::abs(z[b]);
  });
  Vec signal = Vec::Zero(n);
  for (int i = 0; i < keep; ++i) signal[order[i]] = std::abs(z[order[i]]);
  signal /= signal.norm();

  auto Z = std::make_shared<Mat>(n, n);
  *Z = std::sqrt(sigma_n) * signal * signal.transpose();
  const double noise_sd = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = noise_sd * normal(rng);
      (*Z)(i, j) += v;
      if (j != i) (*Z)(j, i) += v;
    }

  Vec x0(n);
  std::uniform_real_distribution<double> unif(0.0, 3.0);
  for (int i = 0; i < n; ++i) x0[i] = unif(rng);
  x0 /= x0.norm();

  Instance inst;
  inst.problem.n = n;
  inst.problem.smooth = [Z](const Vec& x, double& f, Vec& grad) {
    const Vec Zx = (*Z) * x;
    f = -x.dot(Zx);
    grad = -2.0 * Zx;
    return std::isfinite(f);
  };
  inst.problem.nonsmooth = prox_unit_sphere();
  inst.problem.constraints = [](const Vec& x, Vec& c) {
    c = -x;
    return true;
  };
  inst.problem.jacobian_t = [](const Vec&, const Vec& v, Vec& jtv) {
    jtv = -v;
  };
  inst.problem.lower = Vec::Constant(n, -kInf);
  inst.problem.upper = Vec::Zero(n);
  inst.x0 = x0;
  inst.name = "nonneg_pca_n" + std::to_string(n) + "_s" + std::to_string(seed);
  inst.tag = InstanceTag{"nonneg_pca",
                         {{"n", double(n)}, {"sigma_n", sigma_n}, {"sigma_s", sigma_s}},
                         seed};
  return inst;
}

Instance gen_degenerate(std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 30.0);
  Vec x0(2);
  x0[0] = normal(rng);
  x0[1] = normal(rng);

  Instance inst;
  inst.problem.n = 2;
  inst.problem.smooth = [](const Vec& x, double& f, Vec& grad) {
    f = x[0];
    grad = Vec::Zero(2);
    grad[0] = 1.0;
    return true;
  };
  Vec gl(2), gu(2);
  gl << -kInf, 0.0;
  gu << kInf, kInf;
  inst.problem.nonsmooth = prox_box(gl, gu);
  inst.problem.constraints = [](const Vec& x, Vec& c) {
    c.resize(1);
    c[0] = x[0] * x[0] + x[1];
    return std::isfinite(c[0]);
  };
  inst.problem.jacobian_t = [](const Vec& x, const Vec& v, Vec& jtv) {
    jtv.resize(2);
    jtv[0] = 2.0 * x[0] * v[0];
    jtv[1] = v[0];
  };
  inst.problem.lower = Vec::Constant(1, -kInf);
  inst.problem.upper = Vec::Zero(1);
  inst.x0 = x0;
  inst.name = "degenerate_s" + std::to_string(seed);
  inst.tag = InstanceTag{"degenerate", {}, seed};
  return inst;
}

Instance gen_eq_qp(int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("eq_qp requires m >= 1");
  const int n = 10 * m;
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  auto Q = std::make_shared<Mat>(Mat::Zero(n, n));
  {
    Mat M = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = unif(rng);
        const double v = normal(rng);
        if (u < 0.1) M(i, j) = v;
      }
    *Q = 0.5 * (M + M.transpose());
  }
  auto q = std::make_shared<Vec>(n);
  for (int i = 0; i < n; ++i) (*q)[i] = normal(rng);

  Vec xl(n), xu(n);
  for (int i = 0; i < n; ++i) xl[i] = -unif(rng);
  for (int i = 0; i < n; ++i) xu[i] = unif(rng);

  auto A = std::make_shared<Mat>(Mat::Zero(m, n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      const double u = unif(rng);
      const double v = normal(rng);
      if (u < 0.1) (*A)(i, j) = v;
    }

  Vec xhat(n);
  for (int i = 0; i < n; ++i) xhat[i] = xl[i] + (xu[i] - xl[i]) * unif(rng);
  auto b = std::make_shared<Vec>((*A) * xhat);

  Vec x0(n);
  for (int i = 0; i < n; ++i) x0[i] = normal(rng);

  Instance inst;
  inst.problem.n = n;
  inst.problem.smooth = [Q, q](const Vec& x, double& f, Vec& grad) {
    const Vec Qx = (*Q) * x;
    f = 0.5 * x.dot(Qx) + q->dot(x);
    grad = Qx + *q;
    return std::isfinite(f);
  };
  inst.problem.nonsmooth = prox_box(xl, xu);
  inst.problem.constraints = [A, b](const Vec& x, Vec& c) {
    c = (*A) * x - *b;
    return c.allFinite();
  };
  inst.problem.jacobian_t = [A](const Vec&, const Vec& v, Vec& jtv) {
    jtv = A->transpose() * v;
  };
  inst.problem.lower = Vec::Zero(m);
  inst.problem.upper = Vec::Zero(m);
  inst.x0 = x0;
  inst.name = "eq_qp_m" + std::to_string(m) + "_s" + std::to_string(seed);
  inst.tag = InstanceTag{"eq_qp", {{"m", double(m)}}, seed};
  return inst;
}

RatingsData load_ratings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ratings file: " + path);
  RatingsData data;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int user, item;
    double rating;
    if (!(ss >> user >> item >> rating))
      throw std::runtime_error("malformed ratings line " + std::to_string(lineno) +
                               " in " + path);
    if (user < 1 || item < 1)
      throw std::runtime_error("ratings ids must be 1-based at line " +
                               std::to_string(lineno));
    data.nu = std::max(data.nu, user);
    data.nm = std::max(data.nm, item);
    data.entries.emplace_back(user - 1, item - 1, rating);
  }
  if (data.entries.empty())
    throw std::runtime_error("empty ratings file: " + path);
  return data;
}

Instance gen_matrix_completion(int nu, int nm, int na, double density,
                               double lambda, std::uint64_t seed,
                               const std::string& ratings_file) {
  if (na < 1) throw std::invalid_argument("completion needs na >= 1");
  if (ratings_file.empty() && (nu < 1 || nm < 1))
    throw std::invalid_argument("completion sizes must be positive");
  if (!(density > 0.0 && density <= 1.0))
    throw std::invalid_argument("density must lie in (0,1]");
  constexpr double kYmin = 1.0, kYmax = 5.0;

  auto rng = make_rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // observed ratings: synthetic quantized low-rank matrix, or a file
  auto observed = std::make_shared<Mat>(Mat::Zero(nu, nm));  // 0 = unobserved
  if (!ratings_file.empty()) {
    const RatingsData data = load_ratings(ratings_file);
    nu = data.nu;
    nm = data.nm;
    *observed = Mat::Zero(nu, nm);
    for (const auto& [i, j, r] : data.entries) (*observed)(i, j) = r;
  } else {
    const int rank = (na + 1) / 2;
    Mat U0(nu, rank), V0(nm, rank);
    for (int i = 0; i < nu; ++i)
      for (int a = 0; a < rank; ++a) U0(i, a) = normal(rng);
    for (int j = 0; j < nm; ++j)
      for (int a = 0; a < rank; ++a) V0(j, a) = normal(rng);
    Mat Yfull = U0 * V0.transpose();
    const double lo = Yfull.minCoeff(), hi = Yfull.maxCoeff();
    const double span = hi > lo ? hi - lo : 1.0;
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nm; ++j) {
        const double scaled =
            kYmin + (kYmax - kYmin) * (Yfull(i, j) - lo) / span;
        const double quantized = std::clamp(std::round(scaled), kYmin, kYmax);
        if (unif(rng) < density) (*observed)(i, j) = quantized;
      }
  }

  const int n = na * (nu + nm);
  const int rows = nu * nm;

  // variables: U rows then V rows, both row-major
  const auto u_row = [na](const Vec& x, int i) {
    return x.segment(i * na, na);
  };
  const auto v_row = [na, nu](const Vec& x, int j) {
    return x.segment((nu + j) * na, na);
  };

  std::vector<std::pair<int, int>> omega;
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nm; ++j)
      if ((*observed)(i, j) != 0.0) omega.emplace_back(i, j);
  const auto omega_ptr =
      std::make_shared<std::vector<std::pair<int, int>>>(std::move(omega));
  const double inv_card = omega_ptr->empty() ? 0.0 : 1.0 / omega_ptr->size();

  Instance inst;
  inst.problem.n = n;
  inst.problem.smooth = [=](const Vec& x, double& f, Vec& grad) {
    f = 0.0;
    grad = Vec::Zero(n);
    for (const auto& [i, j] : *omega_ptr) {
      const auto ui = u_row(x, i);
      const auto vj = v_row(x, j);
      const double r = ui.dot(vj) - (*observed)(i, j);
      f += inv_card * r * r;
      grad.segment(i * na, na) += 2.0 * inv_card * r * vj;
      grad.segment((nu + j) * na, na) += 2.0 * inv_card * r * ui;
    }
    return std::isfinite(f);
  };
  {
    std::vector<std::pair<ProxPtr, int>> parts;
    const ProxPtr sphere = prox_unit_sphere();
    for (int i = 0; i < nu; ++i) parts.emplace_back(sphere, na);
    parts.emplace_back(prox_l0(lambda / nm), nm * na);
    inst.problem.nonsmooth = prox_separable_product(std::move(parts));
  }
  inst.problem.constraints = [=](const Vec& x, Vec& c) {
    c.resize(rows);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nm; ++j)
        c[i * nm + j] = u_row(x, i).dot(v_row(x, j));
    return c.allFinite();
  };
  inst.problem.jacobian_t = [=](const Vec& x, const Vec& v, Vec& jtv) {
    jtv = Vec::Zero(n);
    for (int i = 0; i < nu; ++i)
      for (int j = 0; j < nm; ++j) {
        const double vij = v[i * nm + j];
        if (vij == 0.0) continue;
        jtv.segment(i * na, na) += vij * v_row(x, j);
        jtv.segment((nu + j) * na, na) += vij * u_row(x, i);
      }
  };
  inst.problem.lower.resize(rows);
  inst.problem.upper.resize(rows);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nm; ++j) {
      const int r = i * nm + j;
      const double y = (*observed)(i, j);
      if (y != 0.0) {
        inst.problem.lower[r] = std::max(kYmin, y - 1.0);
        inst.problem.upper[r] = std::min(kYmax, y + 1.0);
      } else {
        inst.problem.lower[r] = kYmin;
        inst.problem.upper[r] = kYmax;
      }
    }

  Vec x0(n);
  for (int i = 0; i < n; ++i) x0[i] = normal(rng);
  for (int i = 0; i < nu; ++i) {
    const double norm = x0.segment(i * na, na).norm();
    if (norm > 0.0) x0.segment(i * na, na) /= norm;
    else x0[i * na] = 1.0;
  }
  inst.x0 = x0;
  inst.name = "completion_u" + std::to_string(nu) + "_s" + std::to_string(seed);
  inst.tag = InstanceTag{"completion",
                         {{"nu", double(nu)},
                          {"nm", double(nm)},
                          {"na", double(na)},
                          {"density", density},
                          {"lambda", lambda}},
                         seed};
  return inst;
}

Instance gen_rosenbrock(bool equality_variant, std::uint64_t seed) {
  constexpr double cx = -0.25, cy = 0.25, rc = 0.5;
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);

  const auto cval = [&](double x1, double x2) {
    const double dx = x1 - cx, dy = x2 - cy;
    return rc * rc - (dx * dx + dy * dy);
  };

  Vec x0(2);
  if (equality_variant) {
    x0[0] = unif(rng);
    x0[1] = unif(rng);
  } else {
    // resample until strictly feasible
    do {
      x0[0] = unif(rng);
      x0[1] = unif(rng);
    } while (cval(x0[0], x0[1]) >= 0.0);
  }

  const auto smooth = [](const Vec& x, double& f, Vec& grad) {
    const double w = x[1] + 1.0 - (x[0] + 1.0) * (x[0] + 1.0);
    f = 100.0 * w * w;
    grad = Vec::Zero(x.size());
    grad[0] = -400.0 * (x[0] + 1.0) * w;
    grad[1] = 200.0 * w;
    return std::isfinite(f);
  };

  Instance inst;
  if (!equality_variant) {
    inst.problem.n = 2;
    inst.problem.smooth = smooth;
    inst.problem.nonsmooth = prox_halfnorm();
    inst.problem.constraints = [=](const Vec& x, Vec& c) {
      c.resize(1);
      c[0] = cval(x[0], x[1]);
      return std::isfinite(c[0]);
    };
    inst.problem.jacobian_t = [=](const Vec& x, const Vec& v, Vec& jtv) {
      jtv.resize(2);
      jtv[0] = -2.0 * (x[0] - cx) * v[0];
      jtv[1] = -2.0 * (x[1] - cy) * v[0];
    };
    inst.problem.lower = Vec::Constant(1, -kInf);
    inst.problem.upper = Vec::Zero(1);
    inst.x0 = x0;
    inst.name = "rosenbrock_s" + std::to_string(seed);
    inst.tag = InstanceTag{"rosenbrock", {}, seed};
    return inst;
  }

  // variables (x1, x2, z); constraint c(x) - z = 0, z <= 0 via g
  inst.problem.n = 3;
  inst.problem.smooth = [smooth](const Vec& x, double& f, Vec& grad) {
    Vec g2;
    const bool ok = smooth(x.head(2), f, g2);
    grad = Vec::Zero(3);
    grad.head(2) = g2;
    return ok;
  };
  inst.problem.nonsmooth = prox_separable_product(
      {{prox_halfnorm(), 2}, {prox_nonpos(), 1}});
  inst.problem.constraints = [=](const Vec& x, Vec& c) {
    c.resize(1);
    c[0] = cval(x[0], x[1]) - x[2];
    return std::isfinite(c[0]);
  };
  inst.problem.jacobian_t = [=](const Vec& x, const Vec& v, Vec& jtv) {
    jtv.resize(3);
    jtv[0] = -2.0 * (x[0] - cx) * v[0];
    jtv[1] = -2.0 * (x[1] - cy) * v[0];
    jtv[2] = -v[0];
  };
  inst.problem.lower = Vec::Zero(1);
  inst.problem.upper = Vec::Zero(1);

  Vec x0e(3);
  x0e.head(2) = x0;
  x0e[2] = std::min(cval(x0[0], x0[1]), 0.0);
  inst.x0 = x0e;
  inst.name = "rosenbrock_eq_s" + std::to_string(seed);
  inst.tag = InstanceTag{"rosenbrock_eq", {}, seed};
  return inst;
}

Instance make_instance(const InstanceSpec& spec) {
  using F = InstanceSpec::Family;
  switch (spec.family) {
    case F::NonnegPCA:
      return gen_nonneg_pca(spec.n, spec.sigma_n, spec.sigma_s, spec.seed);
    case F::MatrixCompletion:
      return gen_matrix_completion(spec.nu, spec.nm, spec.na, spec.density,
                                   spec.lambda, spec.seed, spec.ratings_file);
    case F::DegenerateConvex:
      return gen_degenerate(spec.seed);
    case F::RandomEqQP:
      return gen_eq_qp(spec.m, spec.seed);
    case F::NonsmoothRosenbrock:
      return gen_rosenbrock(false, spec.seed);
    case F::RosenbrockEq:
      return gen_rosenbrock(true, spec.seed);
  }
  throw std::logic_error("unreachable");
}

InstanceSpec instance_spec_from_tag(const InstanceTag& tag) {
  InstanceSpec spec;
  spec.family = InstanceSpec::family_from_string(tag.family);
  spec.seed = tag.seed;
  const auto get = [&](const char* key, double fallback) {
    const auto it = tag.params.find(key);
    return it == tag.params.end() ? fallback : it->second;
  };
  spec.n = static_cast<int>(get("n", spec.n));
  spec.sigma_n = get("sigma_n", spec.sigma_n);
  spec.sigma_s = get("sigma_s", spec.sigma_s);
  spec.m = static_cast<int>(get("m", spec.m));
  spec.nu = static_cast<int>(get("nu", spec.nu));
  spec.nm = static_cast<int>(get("nm", spec.nm));
  spec.na = static_cast<int>(get("na", spec.na));
  spec.density = get("density", spec.density);
  spec.lambda = get("lambda", spec.lambda);
  return spec;
}

Metric metric_from_string(const std::string& s) {
  if (s == "grad_evals") return Metric::GradEvals;
  if (s == "inner_iters") return Metric::InnerIters;
  if (s == "outer_iters") return Metric::OuterIters;
  throw std::invalid_argument(
      "unknown metric '" + s + "'; valid: grad_evals, inner_iters, outer_iters");
}

double record_metric(const RunRecord& record, Metric metric) {
  if (record.exit.status != ExitStatus::EpsKkt) return kInf;
  switch (metric) {
    case Metric::GradEvals:
      return record.iterations.empty()
                 ? 0.0
                 : double(record.iterations.back().grad_evals);
    case Metric::InnerIters: {
      long long total = 0;
      for (const auto& it : record.iterations) total += it.inner_iters;
      return double(total);
    }
    case Metric::OuterIters:
      return double(record.iterations.size());
  }
  return kInf;
}

std::vector<ProfilePoint> data_profile(std::vector<double> metrics) {
  const double total = double(metrics.size());
  std::vector<double> finite;
  for (double m : metrics)
    if (std::isfinite(m)) finite.push_back(m);
  std::sort(finite.begin(), finite.end());
  finite.erase(std::unique(finite.begin(), finite.end()), finite.end());

  std::vector<ProfilePoint> curve;
  for (double t : finite) {
    int count = 0;
    for (double m : metrics) count += std::isfinite(m) && m <= t;
    curve.push_back({t, count / total});
  }
  return curve;
}

std::vector<ProfilePoint> pairwise_profile(
    const std::vector<double>& metrics, const std::vector<double>& metrics_alt) {
  if (metrics.size() != metrics_alt.size())
    throw std::invalid_argument("pairwise profile: instance sets differ");
  std::vector<double> ratios;
  for (size_t i = 0; i < metrics.size(); ++i) {
    const double a = metrics[i], b = metrics_alt[i];
    if (!std::isfinite(a) || !std::isfinite(b)) {
      ratios.push_back(kInf);
    } else if (b == 0.0) {
      ratios.push_back(a == 0.0 ? 1.0 : kInf);
    } else {
      ratios.push_back(a / b);
    }
  }
  return data_profile(std::move(ratios));
}

void write_data_profile_csv(std::ostream& os,
                            const std::vector<ProfilePoint>& curve) {
  os << "t,fraction\n";
  for (const auto& p : curve) os << p.t << "," << p.fraction << "\n";
}

void write_pairwise_profile_csv(
    std::ostream& os,
    const std::vector<std::pair<std::string, std::vector<ProfilePoint>>>& curves) {
  os << "tau,fraction,solver\n";
  for (const auto& [solver, curve] : curves)
    for (const auto& p : curve)
      os << p.t << "," << p.fraction << "," << solver << "\n";
}

std::vector<std::pair<std::string, std::vector<ProfilePoint>>>
read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty profile CSV");
  const bool pairwise = line.rfind("tau,", 0) == 0;
  if (!pairwise && line.rfind("t,", 0) != 0)
    throw std::runtime_error("unrecognized profile CSV header: " + line);

  std::vector<std::pair<std::string, std::vector<ProfilePoint>>> curves;
  const auto curve_for = [&](const std::string& label)
      -> std::vector<ProfilePoint>& {
    for (auto& [l, c] : curves)
      if (l == label) return c;
    curves.emplace_back(label, std::vector<ProfilePoint>{});
    return curves.back().second;
  };

  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string t_str, frac_str, label;
    if (!std::getline(ss, t_str, ',') || !std::getline(ss, frac_str, ','))
      throw std::runtime_error("malformed profile CSV line " +
                               std::to_string(lineno));
    if (pairwise && !std::getline(ss, label, ','))
      throw std::runtime_error("missing solver label at line " +
                               std::to_string(lineno));
    curve_for(label).push_back({std::stod(t_str), std::stod(frac_str)});
  }
  return curves;
}

}  // namespace penbar
