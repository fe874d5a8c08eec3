#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "penbar/inner.hpp"
#include "penbar/problem.hpp"

namespace penbar {

enum class Formulation { Native, SplitEqualities };

enum class ExitStatus { EpsKkt, MaxOuter, TimeLimit, EvalFailure };

std::string to_string(ExitStatus s);

struct OuterConfig {
  double eps_p = 1e-5;       // primal feasibility / complementarity tolerance
  double eps_d = 1e-5;       // dual (stationarity) tolerance
  double alpha0 = 1.0;
  double mu0 = 1.0;
  double eps0 = 0.0;         // <= 0: adaptive, max{eps_d, kappa_eps * eta0}
  double delta_alpha = 2.0;  // > 1
  double delta_eps = 0.25;   // in (0,1)
  double delta_mu = 0.25;    // in (0,1)
  double kappa_eps = 1e-2;   // in (0,1)
  int max_outer = 200;
  double time_limit_s = 0.0;  // <= 0: none
  std::string barrier = "inverse";
  Formulation formulation = Formulation::Native;
  InnerConfig inner;

  void validate() const;
};

/// One outer iteration of the trajectory.  The slim fields are what gets
/// serialized; x/y/y_eq are kept in memory for the invariant checks.
struct IterateRecord {
  int k = 0;
  double alpha = 0.0, mu = 0.0, eps = 0.0;
  double p = 0.0, s = 0.0;
  double threshold = 0.0;  // -2 m' (mu/alpha) b*(alpha/mu)
  int inner_iters = 0;
  long long grad_evals = 0;  // cumulative
  double wall_ms = 0.0;
  bool inner_converged = true;
  Vec x, y, y_eq;
};

struct ExitBlock {
  ExitStatus status = ExitStatus::MaxOuter;
  Vec x, y, y_eq;
  double objective = 0.0;
  double gamma_final = 0.0;
};

/// Instance provenance carried in the record so that runs can be
/// re-validated without the original ProblemSpec.
struct InstanceTag {
  std::string family;
  std::map<std::string, double> params;
  std::uint64_t seed = 0;
};

struct RunRecord {
  OuterConfig config;
  double eps0_resolved = 0.0;
  double eta0 = 0.0;
  std::optional<InstanceTag> instance;
  std::vector<RowKind> row_kinds;  // inequality/bilateral rows, in y order
  std::vector<IterateRecord> iterations;
  ExitBlock exit;
};

/// Penalty-barrier outer loop: repeatedly finds an eps_k-stationary point
/// of the smooth subproblem, forms multiplier estimates, measures
/// feasibility p_k and complementarity s_k, and updates (alpha, mu, eps)
/// until the (eps_p, eps_d)-KKT test passes.
RunRecord run(const ProblemSpec& problem, const OuterConfig& cfg, const Vec& x0);

/// Independent re-verification of the four approximate-KKT conditions at
/// the returned primal-dual pair.
struct KktReport {
  bool dual_stationarity = false;  // recomputed residual <= eps_d
  bool primal_feasibility = false;
  bool dual_feasibility = false;   // y >= 0 on one-sided rows
  bool complementarity = false;
  double residual = 0.0, p = 0.0, s = 0.0;
  bool all() const {
    return dual_stationarity && primal_feasibility && dual_feasibility &&
           complementarity;
  }
};
KktReport kkt_report(const RunRecord& record, const ProblemSpec& problem);
/// Overload that regenerates the instance from the record's tag.
KktReport kkt_report(const RunRecord& record);

/// Trajectory invariants: multiplier range, parameter monotonicity,
/// the small-mu slackness guarantee, threshold monotonicity, and the R-linear
/// infeasibility envelope on alpha-constant steps.  Returns human-readable
/// violation descriptions (empty when clean).
std::vector<std::string> check_trajectory(const RunRecord& record);

}  // namespace penbar
