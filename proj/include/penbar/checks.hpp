#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace penbar {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct CheckOptions {
  int psi_oracle_cases = 500;
  int prox_cases = 200;
  std::uint64_t seed = 12345;
  /// Test fixture: additive skew applied to b* inside the conjugate
  /// identity check, to prove the check can fail.
  double conjugate_perturbation = 0.0;
};

/// The analytical core suite: barrier identities, envelope-vs-oracle
/// agreement, the sandwich inequality, behavior-profile table values, prox
/// oracles and finite-difference audits of the shipped benchmark
/// generators.
std::vector<CheckResult> run_analytic_checks(const CheckOptions& opts = {});

}  // namespace penbar
