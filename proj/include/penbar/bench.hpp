#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "penbar/outer.hpp"
#include "penbar/problem.hpp"

namespace penbar {

/// Seeded benchmark instance description.  Identical (family, params,
/// seed) reproduce bit-identical problem data.
struct InstanceSpec {
  enum class Family {
    NonnegPCA,
    MatrixCompletion,
    DegenerateConvex,
    RandomEqQP,
    NonsmoothRosenbrock,
    RosenbrockEq,
  };

  Family family = Family::DegenerateConvex;
  std::uint64_t seed = 0;

  // nonneg_pca
  int n = 10;
  double sigma_n = 1.0;
  double sigma_s = 0.5;

  // eq_qp: m equality rows, n = 10 m variables
  int m = 2;

  // completion: users x items x atoms, observed density, L0 weight
  int nu = 10;
  int nm = 20;
  int na = 3;
  double density = 0.3;
  double lambda = 1e-2;
  std::string ratings_file;  // optional (user item rating) text file

  static Family family_from_string(const std::string& s);
  static std::string family_to_string(Family f);
};

struct Instance {
  ProblemSpec problem;
  Vec x0;
  std::string name;
  InstanceTag tag;
};

Instance make_instance(const InstanceSpec& spec);
InstanceSpec instance_spec_from_tag(const InstanceTag& tag);

/// f(x) = -x^T Z x, g = unit-sphere indicator, c(x) = -x <= 0, with
/// Z = sqrt(sigma_n) z z^T + N for a sparse nonnegative unit signal z and
/// symmetric Gaussian noise N(0, 1/n).
Instance gen_nonneg_pca(int n, double sigma_n, double sigma_s, std::uint64_t seed);

/// min x1 + delta_{x2>=0}  s.t.  x1^2 + x2 <= 0; the unique feasible point
/// (0,0) is optimal but not KKT.
Instance gen_degenerate(std::uint64_t seed);

/// Random sparse nonconvex QP with equality rows Ax = b and a feasible
/// interior point; returned in the requested formulation track.
Instance gen_eq_qp(int m, std::uint64_t seed);

/// Joint completion/factorization of a quantized synthetic rating matrix
/// (or one loaded from ratings_file), bilateral rows on every (i,j).
Instance gen_matrix_completion(int nu, int nm, int na, double density,
                               double lambda, std::uint64_t seed,
                               const std::string& ratings_file = {});

/// Nonsmooth Rosenbrock with a disc-complement constraint; the equality
/// variant introduces z with c(x) - z = 0 and z <= 0.
Instance gen_rosenbrock(bool equality_variant, std::uint64_t seed);

/// Loads a 3-column whitespace-separated (user item rating) file; ids are
/// 1-based.  Throws std::runtime_error on malformed input.
struct RatingsData {
  int nu = 0, nm = 0;
  std::vector<std::tuple<int, int, double>> entries;
};
RatingsData load_ratings(const std::string& path);

/// Benchmark metrics extracted from run records.
enum class Metric { GradEvals, InnerIters, OuterIters };
Metric metric_from_string(const std::string& s);

/// +inf when the run did not reach eps-KKT (unsolved instances are never
/// counted by the profiles).
double record_metric(const RunRecord& record, Metric metric);

struct ProfilePoint {
  double t = 0.0;
  double fraction = 0.0;
};

/// Data profile: cumulative fraction of instances with metric <= t over
/// the sorted distinct finite metric values.
std::vector<ProfilePoint> data_profile(std::vector<double> metrics);

/// Pairwise profile over per-instance ratios t / t_alt (indices must
/// address the same instance set, checked by size).
std::vector<ProfilePoint> pairwise_profile(const std::vector<double>& metrics,
                                           const std::vector<double>& metrics_alt);

void write_data_profile_csv(std::ostream& os,
                            const std::vector<ProfilePoint>& curve);
void write_pairwise_profile_csv(
    std::ostream& os,
    const std::vector<std::pair<std::string, std::vector<ProfilePoint>>>& curves);

/// Parses either CSV schema back into (label, curve) pairs; data profiles
/// come back under the empty label.
std::vector<std::pair<std::string, std::vector<ProfilePoint>>>
read_profile_csv(std::istream& is);

}  // namespace penbar
