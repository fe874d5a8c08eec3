#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "penbar/bench.hpp"
#include "penbar/checks.hpp"
#include "penbar/outer.hpp"
#include "penbar/record_json.hpp"

namespace fs = std::filesystem;
using namespace penbar;

namespace {

struct Options {
  // instance
  std::string family = "degenerate";
  std::uint64_t seed = 0;
  int n = 10;
  double sigma_n = 1.0, sigma_s = 0.5;
  int m = 2;
  int nu = 10, nm = 20, na = 3;
  double density = 0.3, lambda = 1e-2;
  std::string ratings_file;

  // outer / inner
  double eps_p = 1e-5, eps_d = 1e-5;
  double alpha0 = 1.0, mu0 = 1.0, eps0 = 0.0;
  double delta_alpha = 2.0, delta_eps = 0.25, delta_mu = 0.25, kappa_eps = 1e-2;
  int max_outer = 200;
  double time_limit = 0.0;
  std::string barrier = "inverse";
  std::string inner = "accel";
  std::string formulation = "native";
  int inner_max_iters = 200000;
  double gamma_init = 0.0;

  std::string out;
  std::string config_file;

  // bench
  std::string suite = "degenerate";
  std::string out_dir = "records";
  std::string sizes = "1..5";
  int workers = 0;

  // profile
  std::string records_dir;
  std::string mode = "data";
  std::string metric = "grad_evals";
};

InnerVariant parse_inner(const std::string& s) {
  if (s == "spectral" || s == "nmpg") return InnerVariant::SpectralNonmonotone;
  if (s == "accel" || s == "panoc") return InnerVariant::Accelerated;
  throw CLI::ValidationError("--inner", "unknown inner solver '" + s +
                                            "'; valid: spectral, accel");
}

Formulation parse_formulation(const std::string& s) {
  if (s == "native") return Formulation::Native;
  if (s == "split") return Formulation::SplitEqualities;
  throw CLI::ValidationError("--formulation",
                             "unknown formulation '" + s + "'; valid: native, split");
}

OuterConfig outer_config(const Options& o) {
  OuterConfig cfg;
  cfg.eps_p = o.eps_p;
  cfg.eps_d = o.eps_d;
  cfg.alpha0 = o.alpha0;
  cfg.mu0 = o.mu0;
  cfg.eps0 = o.eps0;
  cfg.delta_alpha = o.delta_alpha;
  cfg.delta_eps = o.delta_eps;
  cfg.delta_mu = o.delta_mu;
  cfg.kappa_eps = o.kappa_eps;
  cfg.max_outer = o.max_outer;
  cfg.time_limit_s = o.time_limit;
  cfg.barrier = o.barrier;
  cfg.formulation = parse_formulation(o.formulation);
  cfg.inner.variant = parse_inner(o.inner);
  cfg.inner.max_iters = o.inner_max_iters;
  cfg.inner.gamma_init = o.gamma_init;
  return cfg;
}

InstanceSpec instance_spec(const Options& o) {
  InstanceSpec spec;
  spec.family = InstanceSpec::family_from_string(o.family);
  spec.seed = o.seed;
  spec.n = o.n;
  spec.sigma_n = o.sigma_n;
  spec.sigma_s = o.sigma_s;
  spec.m = o.m;
  spec.nu = o.nu;
  spec.nm = o.nm;
  spec.na = o.na;
  spec.density = o.density;
  spec.lambda = o.lambda;
  spec.ratings_file = o.ratings_file;
  return spec;
}

// config file: JSON object mirroring the long flag names (without --).
// Values fill in anything the command line did not set; explicit flags win.
void apply_config_file(Options& o, const CLI::App* cmd) {
  if (o.config_file.empty()) return;
  std::ifstream in(o.config_file);
  if (!in) throw CLI::ValidationError("--config", "cannot open " + o.config_file);
  nlohmann::json j;
  in >> j;
  const auto from_config = [&](const char* key) {
    const std::string flag = std::string("--") + key;
    return j.contains(key) &&
           (cmd->get_option_no_throw(flag) == nullptr || cmd->count(flag) == 0);
  };
  const auto num = [&](const char* key, auto& slot) {
    if (from_config(key)) slot = j[key].template get<std::decay_t<decltype(slot)>>();
  };
  num("eps-p", o.eps_p);
  num("eps-d", o.eps_d);
  num("alpha0", o.alpha0);
  num("mu0", o.mu0);
  num("eps0", o.eps0);
  num("delta-alpha", o.delta_alpha);
  num("delta-eps", o.delta_eps);
  num("delta-mu", o.delta_mu);
  num("kappa-eps", o.kappa_eps);
  num("max-outer", o.max_outer);
  num("time-limit", o.time_limit);
  num("inner-max-iters", o.inner_max_iters);
  num("gamma-init", o.gamma_init);
  num("seed", o.seed);
  num("workers", o.workers);
  const auto str = [&](const char* key, std::string& slot) {
    if (from_config(key)) slot = j[key].get<std::string>();
  };
  str("barrier", o.barrier);
  str("inner", o.inner);
  str("formulation", o.formulation);
  str("family", o.family);
}

void add_solver_flags(CLI::App* app, Options& o) {
  app->add_option("--eps-p", o.eps_p, "Primal tolerance")->capture_default_str();
  app->add_option("--eps-d", o.eps_d, "Dual tolerance")->capture_default_str();
  app->add_option("--alpha0", o.alpha0, "Initial penalty parameter")->capture_default_str();
  app->add_option("--mu0", o.mu0, "Initial barrier parameter")->capture_default_str();
  app->add_option("--eps0", o.eps0, "Initial inner tolerance (0 = adaptive)")->capture_default_str();
  app->add_option("--delta-alpha", o.delta_alpha, "Penalty growth factor (>1)")->capture_default_str();
  app->add_option("--delta-eps", o.delta_eps, "Inner tolerance shrink factor")->capture_default_str();
  app->add_option("--delta-mu", o.delta_mu, "Barrier shrink factor")->capture_default_str();
  app->add_option("--kappa-eps", o.kappa_eps, "Adaptive eps0 coefficient")->capture_default_str();
  app->add_option("--max-outer", o.max_outer, "Outer iteration cap")->capture_default_str();
  app->add_option("--time-limit", o.time_limit, "Wall-clock limit in seconds (0 = none)")->capture_default_str();
  app->add_option("--barrier", o.barrier, "Barrier id: inverse, inverse_p:<p>, loglike, exp")->capture_default_str();
  app->add_option("--inner", o.inner, "Inner solver: spectral, accel")->capture_default_str();
  app->add_option("--formulation", o.formulation, "Equality handling: native, split")->capture_default_str();
  app->add_option("--inner-max-iters", o.inner_max_iters, "Inner iteration cap")->capture_default_str();
  app->add_option("--gamma-init", o.gamma_init, "Initial stepsize (0 = auto probe)")->capture_default_str();
  app->add_option("--config", o.config_file, "JSON config file mirroring flag names");
}

void add_instance_flags(CLI::App* app, Options& o) {
  app->add_option("--family", o.family,
                  "Instance family: nonneg_pca, completion, degenerate, eq_qp, "
                  "rosenbrock, rosenbrock_eq")
      ->capture_default_str();
  app->add_option("--seed", o.seed, "Instance seed")->envname("PB_SEED")->capture_default_str();
  app->add_option("--n", o.n, "nonneg_pca dimension")->capture_default_str();
  app->add_option("--sigma-n", o.sigma_n, "nonneg_pca signal-to-noise")->capture_default_str();
  app->add_option("--sigma-s", o.sigma_s, "nonneg_pca sparsity level")->capture_default_str();
  app->add_option("--m", o.m, "eq_qp equality rows (n = 10 m)")->capture_default_str();
  app->add_option("--nu", o.nu, "completion users")->capture_default_str();
  app->add_option("--nm", o.nm, "completion items")->capture_default_str();
  app->add_option("--na", o.na, "completion atoms")->capture_default_str();
  app->add_option("--density", o.density, "completion observed density")->capture_default_str();
  app->add_option("--lambda", o.lambda, "completion L0 weight")->capture_default_str();
  app->add_option("--ratings-file", o.ratings_file, "completion (user item rating) file");
}

int cmd_solve(Options& o, const CLI::App* cmd) {
  apply_config_file(o, cmd);
  const Instance inst = make_instance(instance_spec(o));
  const OuterConfig cfg = outer_config(o);
  RunRecord rec = run(inst.problem, cfg, inst.x0);
  rec.instance = inst.tag;
  if (!o.out.empty()) save_run_record(o.out, rec);

  const auto& exit = rec.exit;
  const double p = rec.iterations.empty() ? 0.0 : rec.iterations.back().p;
  const double s = rec.iterations.empty() ? 0.0 : rec.iterations.back().s;
  const double alpha = rec.iterations.empty() ? cfg.alpha0 : rec.iterations.back().alpha;
  const double mu = rec.iterations.empty() ? cfg.mu0 : rec.iterations.back().mu;
  const long long gev = rec.iterations.empty() ? 0 : rec.iterations.back().grad_evals;
  std::cout << inst.name << ": status=" << to_string(exit.status)
            << " objective=" << exit.objective << " p=" << p << " s=" << s
            << " outer=" << rec.iterations.size() << " grad_evals=" << gev
            << " alpha=" << alpha << " mu=" << mu << "\n";
  switch (exit.status) {
    case ExitStatus::EpsKkt: return 0;
    case ExitStatus::MaxOuter:
    case ExitStatus::TimeLimit: return 2;
    case ExitStatus::EvalFailure: return 1;
  }
  return 1;
}

struct BenchJob {
  InstanceSpec spec;
  OuterConfig cfg;
  std::string file;  // output name relative to out dir
};

std::vector<int> parse_sizes(const std::string& text) {
  // "a..b" or comma list
  std::vector<int> sizes;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const int a = std::stoi(text.substr(0, dots));
    const int b = std::stoi(text.substr(dots + 2));
    for (int v = a; v <= b; ++v) sizes.push_back(v);
  } else {
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) sizes.push_back(std::stoi(tok));
  }
  if (sizes.empty()) throw CLI::ValidationError("--sizes", "empty size list");
  return sizes;
}

std::string variant_label(const OuterConfig& cfg) {
  std::string label = cfg.barrier;
  label += cfg.inner.variant == InnerVariant::Accelerated ? "_accel" : "_spectral";
  if (cfg.formulation == Formulation::SplitEqualities) label += "_split";
  return label;
}

std::vector<BenchJob> build_suite(const Options& o) {
  std::vector<BenchJob> jobs;
  const auto base_cfg = [&] {
    OuterConfig cfg = outer_config(o);
    return cfg;
  };
  const auto push = [&](InstanceSpec spec, OuterConfig cfg, std::string stem) {
    std::ostringstream name;
    name << stem << "__" << variant_label(cfg) << "__eps"
         << cfg.eps_p << ".json";
    jobs.push_back({std::move(spec), std::move(cfg), name.str()});
  };

  if (o.suite == "pca_small") {
    const double sigma_ns[] = {0.05, 0.1, 0.25, 0.5, 1.0};
    const double sigma_ss[] = {0.1, 0.3, 0.7, 0.9};
    for (int n : {10, 30})
      for (double eps : {1e-3, 1e-4})
        for (const std::string& barrier : {"inverse", "loglike"})
          for (const std::string& inner : {"spectral", "accel"}) {
            int idx = 0;
            for (double sn : sigma_ns)
              for (double ss : sigma_ss) {
                InstanceSpec spec;
                spec.family = InstanceSpec::Family::NonnegPCA;
                spec.n = n;
                spec.sigma_n = sn;
                spec.sigma_s = ss;
                spec.seed = idx;
                OuterConfig cfg = base_cfg();
                cfg.eps_p = cfg.eps_d = eps;
                cfg.barrier = barrier;
                cfg.inner.variant = parse_inner(inner);
                push(spec, cfg,
                     "pca_n" + std::to_string(n) + "_i" + std::to_string(idx));
                ++idx;
              }
          }
  } else if (o.suite == "degenerate") {
    for (int seed = 0; seed < 100; ++seed) {
      InstanceSpec spec;
      spec.family = InstanceSpec::Family::DegenerateConvex;
      spec.seed = seed;
      OuterConfig cfg = base_cfg();
      cfg.eps_p = cfg.eps_d = 1e-7;
      push(spec, cfg, "degenerate_s" + std::to_string(seed));
    }
  } else if (o.suite == "eq_qp") {
    for (int m : parse_sizes(o.sizes))
      for (int seed = 0; seed < 10; ++seed)
        for (const std::string& formulation : {"native", "split"}) {
          InstanceSpec spec;
          spec.family = InstanceSpec::Family::RandomEqQP;
          spec.m = m;
          spec.seed = seed;
          OuterConfig cfg = base_cfg();
          cfg.eps_p = cfg.eps_d = 1e-5;
          cfg.formulation = parse_formulation(formulation);
          push(spec, cfg,
               "eqqp_m" + std::to_string(m) + "_s" + std::to_string(seed));
        }
  } else if (o.suite == "rosenbrock") {
    for (int seed = 0; seed < 100; ++seed)
      for (bool eq : {false, true}) {
        InstanceSpec spec;
        spec.family = eq ? InstanceSpec::Family::RosenbrockEq
                         : InstanceSpec::Family::NonsmoothRosenbrock;
        spec.seed = seed;
        OuterConfig cfg = base_cfg();
        cfg.eps_p = cfg.eps_d = 1e-4;
        push(spec, cfg,
             std::string(eq ? "rosenbrock_eq" : "rosenbrock") + "_s" +
                 std::to_string(seed));
      }
  } else if (o.suite == "completion_small") {
    for (int seed = 0; seed < 10; ++seed) {
      InstanceSpec spec;
      spec.family = InstanceSpec::Family::MatrixCompletion;
      spec.seed = seed;
      spec.nu = o.nu;
      spec.nm = o.nm;
      spec.na = o.na;
      spec.density = o.density;
      spec.lambda = o.lambda;
      OuterConfig cfg = base_cfg();
      cfg.eps_p = cfg.eps_d = 1e-3;
      push(spec, cfg, "completion_s" + std::to_string(seed));
    }
  } else {
    throw CLI::ValidationError(
        "--suite", "unknown suite '" + o.suite +
                       "'; valid: pca_small, eq_qp, degenerate, rosenbrock, "
                       "completion_small");
  }
  return jobs;
}

int cmd_bench(Options& o, const CLI::App* cmd) {
  apply_config_file(o, cmd);
  const std::vector<BenchJob> jobs = build_suite(o);
  fs::create_directories(o.out_dir);

  int workers = o.workers;
  if (const char* env = std::getenv("PB_WORKERS"); env && workers <= 0)
    workers = std::atoi(env);
  if (workers <= 0)
    workers = std::max(1u, std::min(8u, std::thread::hardware_concurrency()));

  std::atomic<size_t> next{0};
  std::atomic<int> failures{0};
  std::mutex io_mutex;
  const auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      const BenchJob& job = jobs[i];
      try {
        const Instance inst = make_instance(job.spec);
        RunRecord rec = run(inst.problem, job.cfg, inst.x0);
        rec.instance = inst.tag;
        const fs::path final_path = fs::path(o.out_dir) / job.file;
        const fs::path tmp_path = final_path.string() + ".tmp";
        save_run_record(tmp_path.string(), rec);
        fs::rename(tmp_path, final_path);
        if (rec.exit.status != ExitStatus::EpsKkt) ++failures;
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cerr << "bench job " << job.file << " failed: " << e.what() << "\n";
        ++failures;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& job : jobs) {
    manifest.push_back(
        {{"file", job.file},
         {"family", InstanceSpec::family_to_string(job.spec.family)},
         {"seed", job.spec.seed},
         {"barrier", job.cfg.barrier},
         {"inner", job.cfg.inner.variant == InnerVariant::Accelerated
                       ? "accel"
                       : "spectral"},
         {"formulation",
          job.cfg.formulation == Formulation::SplitEqualities ? "split"
                                                              : "native"},
         {"eps_p", job.cfg.eps_p}});
  }
  std::ofstream mf(fs::path(o.out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";

  std::cout << "suite " << o.suite << ": " << jobs.size() << " runs, "
            << failures.load() << " not solved to eps-KKT, records in "
            << o.out_dir << "\n";
  return 0;
}

int cmd_profile(Options& o) {
  const Metric metric = metric_from_string(o.metric);
  std::vector<std::pair<std::string, RunRecord>> records;
  for (const auto& entry : fs::directory_iterator(o.records_dir)) {
    if (entry.path().extension() != ".json") continue;
    if (entry.path().filename() == "manifest.json") continue;
    records.emplace_back(entry.path().filename().string(),
                         load_run_record(entry.path().string()));
  }
  if (records.empty()) {
    std::cerr << "no records in " << o.records_dir << "\n";
    return 1;
  }
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::ostringstream csv;
  if (o.mode == "data") {
    std::vector<double> metrics;
    for (const auto& [name, rec] : records)
      metrics.push_back(record_metric(rec, metric));
    write_data_profile_csv(csv, data_profile(std::move(metrics)));
  } else if (o.mode == "pairwise") {
    // pair records by <stem with formulation stripped>, grouped per solver
    struct Pair {
      double native = std::numeric_limits<double>::infinity();
      double split = std::numeric_limits<double>::infinity();
    };
    std::map<std::string, std::map<std::string, Pair>> by_solver;
    for (const auto& [name, rec] : records) {
      const bool split = rec.config.formulation == Formulation::SplitEqualities;
      std::string key = name;
      const auto pos = key.find("_split");
      if (pos != std::string::npos) key.erase(pos, 6);
      std::string solver = rec.config.barrier;
      solver += rec.config.inner.variant == InnerVariant::Accelerated
                    ? "_accel"
                    : "_spectral";
      auto& slot = by_solver[solver][key];
      (split ? slot.split : slot.native) = record_metric(rec, metric);
    }
    std::vector<std::pair<std::string, std::vector<ProfilePoint>>> curves;
    for (const auto& [solver, pairs] : by_solver) {
      std::vector<double> native, split;
      for (const auto& [key, pr] : pairs) {
        native.push_back(pr.native);
        split.push_back(pr.split);
      }
      curves.emplace_back(solver, pairwise_profile(native, split));
    }
    write_pairwise_profile_csv(csv, curves);
  } else {
    throw CLI::ValidationError("--mode", "unknown mode '" + o.mode +
                                             "'; valid: data, pairwise");
  }

  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out(o.out);
    out << csv.str();
  }
  return 0;
}

int cmd_check() {
  const auto results = run_analytic_checks();
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name;
    if (!r.detail.empty()) std::cout << " (" << r.detail << ")";
    std::cout << "\n";
    failed += !r.pass;
  }
  std::cout << results.size() - failed << "/" << results.size()
            << " checks passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"penbar: penalty-barrier solver for constrained structured problems"};
  app.require_subcommand(1);
  Options o;

  CLI::App* solve = app.add_subcommand("solve", "Solve a single instance");
  add_instance_flags(solve, o);
  add_solver_flags(solve, o);
  solve->add_option("--out", o.out, "Write the run record JSON here");

  CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite");
  bench->add_option("--suite", o.suite,
                    "Suite: pca_small, eq_qp, degenerate, rosenbrock, "
                    "completion_small")
      ->capture_default_str();
  bench->add_option("--out-dir", o.out_dir, "Record output directory")->capture_default_str();
  bench->add_option("--sizes", o.sizes, "eq_qp sizes, e.g. 1..5 or 1,3,5")->capture_default_str();
  bench->add_option("--workers", o.workers, "Worker pool size (0 = auto)")
      ->envname("PB_WORKERS")
      ->capture_default_str();
  add_instance_flags(bench, o);
  add_solver_flags(bench, o);

  CLI::App* profile = app.add_subcommand("profile", "Profiles from a record directory");
  profile->add_option("--dir", o.records_dir, "Record directory")->required();
  profile->add_option("--mode", o.mode, "data or pairwise")->capture_default_str();
  profile->add_option("--metric", o.metric,
                      "grad_evals, inner_iters or outer_iters")
      ->capture_default_str();
  profile->add_option("--out", o.out, "CSV output path (stdout if omitted)");

  CLI::App* check = app.add_subcommand("check", "Run the analytic property suite");
  (void)check;

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return cmd_solve(o, solve);
    if (bench->parsed()) return cmd_bench(o, bench);
    if (profile->parsed()) return cmd_profile(o);
    if (check->parsed()) return cmd_check();
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
