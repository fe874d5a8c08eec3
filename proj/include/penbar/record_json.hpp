#pragma once

#include <string>

#include "penbar/outer.hpp"

namespace penbar {

/// RunRecord <-> single JSON document.  Per-iteration entries carry the
/// slim fields (k, alpha, mu, eps, p, s, threshold, inner_iters,
/// grad_evals, wall_ms); the exit block carries the full primal-dual pair.
std::string to_json_string(const RunRecord& record, int indent = 2);
RunRecord run_record_from_json(const std::string& text);

void save_run_record(const std::string& path, const RunRecord& record);
RunRecord load_run_record(const std::string& path);

}  // namespace penbar
