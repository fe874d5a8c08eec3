#include "penbar/record_json.hpp"

#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace penbar {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) v[static_cast<int>(i)] = a[i].get<double>();
  return v;
}

std::string variant_to_string(InnerVariant v) {
  return v == InnerVariant::Accelerated ? "accel" : "spectral";
}

InnerVariant variant_from_string(const std::string& s) {
  if (s == "accel") return InnerVariant::Accelerated;
  if (s == "spectral") return InnerVariant::SpectralNonmonotone;
  throw std::invalid_argument("unknown inner variant '" + s +
                              "'; valid: spectral, accel");
}

ExitStatus status_from_string(const std::string& s) {
  if (s == "ekkt") return ExitStatus::EpsKkt;
  if (s == "max_outer") return ExitStatus::MaxOuter;
  if (s == "time_limit") return ExitStatus::TimeLimit;
  if (s == "eval_failure") return ExitStatus::EvalFailure;
  throw std::invalid_argument("unknown exit status: " + s);
}

}  // namespace

std::string to_json_string(const RunRecord& rec, int indent) {
  json j;
  const auto& c = rec.config;
  j["config"] = {
      {"eps_p", c.eps_p},
      {"eps_d", c.eps_d},
      {"alpha0", c.alpha0},
      {"mu0", c.mu0},
      {"eps0", c.eps0},
      {"delta_alpha", c.delta_alpha},
      {"delta_eps", c.delta_eps},
      {"delta_mu", c.delta_mu},
      {"kappa_eps", c.kappa_eps},
      {"max_outer", c.max_outer},
      {"time_limit_s", c.time_limit_s},
      {"barrier", c.barrier},
      {"formulation",
       c.formulation == Formulation::SplitEqualities ? "split" : "native"},
      {"inner",
       {{"variant", variant_to_string(c.inner.variant)},
        {"max_iters", c.inner.max_iters},
        {"gamma_init", c.inner.gamma_init},
        {"nonmonotone_memory", c.inner.nonmonotone_memory},
        {"lbfgs_memory", c.inner.lbfgs_memory}}},
      {"eps0_resolved", rec.eps0_resolved},
      {"eta0", rec.eta0},
  };
  if (rec.instance) {
    j["instance"] = {{"family", rec.instance->family},
                     {"seed", rec.instance->seed},
                     {"params", rec.instance->params}};
  }
  j["iterations"] = json::array();
  for (const auto& it : rec.iterations) {
    j["iterations"].push_back({{"k", it.k},
                               {"alpha", it.alpha},
                               {"mu", it.mu},
                               {"eps", it.eps},
                               {"p", it.p},
                               {"s", it.s},
                               {"threshold", it.threshold},
                               {"inner_iters", it.inner_iters},
                               {"grad_evals", it.grad_evals},
                               {"wall_ms", it.wall_ms}});
  }
  j["exit"] = {{"status", to_string(rec.exit.status)},
               {"x", vec_to_json(rec.exit.x)},
               {"y", vec_to_json(rec.exit.y)},
               {"y_eq", vec_to_json(rec.exit.y_eq)},
               {"objective", rec.exit.objective},
               {"gamma_final", rec.exit.gamma_final}};
  return j.dump(indent);
}

RunRecord run_record_from_json(const std::string& text) {
  const json j = json::parse(text);
  RunRecord rec;
  const json& c = j.at("config");
  auto& cfg = rec.config;
  cfg.eps_p = c.at("eps_p").get<double>();
  cfg.eps_d = c.at("eps_d").get<double>();
  cfg.alpha0 = c.at("alpha0").get<double>();
  cfg.mu0 = c.at("mu0").get<double>();
  cfg.eps0 = c.at("eps0").get<double>();
  cfg.delta_alpha = c.at("delta_alpha").get<double>();
  cfg.delta_eps = c.at("delta_eps").get<double>();
  cfg.delta_mu = c.at("delta_mu").get<double>();
  cfg.kappa_eps = c.at("kappa_eps").get<double>();
  cfg.max_outer = c.at("max_outer").get<int>();
  cfg.time_limit_s = c.at("time_limit_s").get<double>();
  cfg.barrier = c.at("barrier").get<std::string>();
  cfg.formulation = c.at("formulation").get<std::string>() == "split"
                        ? Formulation::SplitEqualities
                        : Formulation::Native;
  const json& ic = c.at("inner");
  cfg.inner.variant = variant_from_string(ic.at("variant").get<std::string>());
  cfg.inner.max_iters = ic.at("max_iters").get<int>();
  cfg.inner.gamma_init = ic.at("gamma_init").get<double>();
  cfg.inner.nonmonotone_memory = ic.at("nonmonotone_memory").get<int>();
  cfg.inner.lbfgs_memory = ic.at("lbfgs_memory").get<int>();
  rec.eps0_resolved = c.at("eps0_resolved").get<double>();
  rec.eta0 = c.at("eta0").get<double>();

  if (j.contains("instance")) {
    InstanceTag tag;
    tag.family = j["instance"].at("family").get<std::string>();
    tag.seed = j["instance"].at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j["instance"].at("params").items())
      tag.params[k] = v.get<double>();
    rec.instance = tag;
  }

  for (const auto& e : j.at("iterations")) {
    IterateRecord it;
    it.k = e.at("k").get<int>();
    it.alpha = e.at("alpha").get<double>();
    it.mu = e.at("mu").get<double>();
    it.eps = e.at("eps").get<double>();
    it.p = e.at("p").get<double>();
    it.s = e.at("s").get<double>();
    it.threshold = e.at("threshold").get<double>();
    it.inner_iters = e.at("inner_iters").get<int>();
    it.grad_evals = e.at("grad_evals").get<long long>();
    it.wall_ms = e.at("wall_ms").get<double>();
    rec.iterations.push_back(std::move(it));
  }

  const json& e = j.at("exit");
  rec.exit.status = status_from_string(e.at("status").get<std::string>());
  rec.exit.x = vec_from_json(e.at("x"));
  rec.exit.y = vec_from_json(e.at("y"));
  rec.exit.y_eq = vec_from_json(e.at("y_eq"));
  rec.exit.objective = e.at("objective").get<double>();
  rec.exit.gamma_final = e.at("gamma_final").get<double>();
  return rec;
}

void save_run_record(const std::string& path, const RunRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_json_string(record) << "\n";
}

RunRecord load_run_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return run_record_from_json(text);
}

}  // namespace penbar
