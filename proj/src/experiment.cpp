#include "ortholip/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "ortholip/field_io.hpp"
#include "ortholip/oracle.hpp"

namespace ortholip {

using nlohmann::json;

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

unsigned resolve_threads(std::optional<unsigned> flag) {
  if (const char* env = std::getenv("ORTHOLIP_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 1024) throw ConfigError(std::string("ORTHOLIP_THREADS: invalid value '") + env + "'");
    return static_cast<unsigned>(v);
  }
  if (flag) {
    if (*flag < 1) throw ConfigError("--threads must be >= 1");
    return *flag;
  }
  return 1;
}

ScalarMap scalar_map_from_json(const json& j) {
  if (j.is_string()) return scalar_map_from_json(json{{"kind", j}});
  const std::string kind = j.value("kind", "");
  if (kind == "identity") return ScalarMap::identity();
  if (kind == "constant") return ScalarMap::constant(j.value("value", 1.0));
  if (kind == "power") return ScalarMap::power(j.at("r").get<double>());
  if (kind == "scaled_power") return ScalarMap::scaled_power(j.at("r").get<double>());
  throw ConfigError("unknown scalar map '" + kind + "'");
}

namespace {

struct Geometry {
  Point center{0.0, 0.0, 0.0};
  double extent = 0.0;
};

Geometry geometry(const Grid& g) {
  Geometry geo;
  geo.extent = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    geo.center[a] = 0.5 * (g.origin(a) + g.upper(a));
    geo.extent = std::min(geo.extent, g.upper(a) - g.origin(a));
  }
  return geo;
}

double num(const json& p, const char* key, double fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number()) throw ConfigError(std::string("checker parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

int integer(const json& p, const char* key, int fallback) {
  if (!p.contains(key)) return fallback;
  if (!p[key].is_number_integer()) throw ConfigError(std::string("checker parameter '") + key + "' must be an integer");
  return p[key].get<int>();
}

Point center_of(const json& p, const Geometry& geo, int dim) {
  if (!p.contains("center")) return geo.center;
  const auto c = p["center"].get<std::vector<double>>();
  if (static_cast<int>(c.size()) != dim) throw ConfigError("checker center needs one entry per axis");
  Point x{0, 0, 0};
  for (int a = 0; a < dim; ++a) x[a] = c[a];
  return x;
}

ScalarField lower_order_field(const ProblemSpec& spec, const ScalarField& u) {
  ScalarField f(spec.grid);
  if (has_lower_order(spec.lower))
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = lower_prime(spec.lower, n, u[n]);
  return f;
}

ScalarField perturbed_start(const ProblemSpec& spec, double amplitude, std::uint64_t seed, std::size_t index) {
  ScalarField guess = harmonic_extension(spec);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> d(-amplitude, amplitude);
  const auto mask = spec.free_mask();
  for (std::size_t n = 0; n < guess.size(); ++n)
    if (mask[n]) guess[n] += d(rng);
  return guess;
}

json solve_json(const SolveOutcome& o, const ProblemSpec& spec, const Instance& inst, double tol) {
  json j = {{"instance", inst.to_json()},
            {"spacing", spec.grid.min_spacing()},
            {"free_nodes", spec.free_count()},
            {"converged", o.result.converged},
            {"iterations", o.result.iterations},
            {"eps", o.result.eps},
            {"energy", o.result.energy},
            {"residual", o.result.final_residual()},
            {"tol", tol},
            {"message", o.result.message},
            {"residual_history", o.result.residual_history}};
  if (!o.schedule.empty()) {
    j["schedule"] = o.schedule;
    j["w1p_distances"] = o.distances;
  }
  if (o.oracle_max_diff) j["oracle_max_diff"] = *o.oracle_max_diff;
  if (o.oracle_residual) j["oracle_residual"] = *o.oracle_residual;
  return j;
}

void write_json(const std::filesystem::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

std::string report_csv_header() {
  // drop the leading "tag," of the report header
  return "instance," + Instance::csv_header() + "," + InequalityReport::csv_header().substr(4);
}

std::string report_csv_rows(const std::vector<InequalityReport>& reps, const Instance& inst) {
  std::string out;
  for (const auto& r : reps) out += r.csv_row(std::to_string(inst.index) + "," + inst.csv_fields()) + "\n";
  return out;
}

json reports_json(const std::vector<InequalityReport>& reps) {
  json a = json::array();
  for (const auto& r : reps) a.push_back(r.to_json());
  return a;
}

std::uint64_t effective_seed(const ExperimentConfig& cfg, const CommandOptions& opt) {
  return opt.seed ? *opt.seed : cfg.seed;
}

json header(const char* command, const ExperimentConfig& cfg, const CommandOptions& opt) {
  return {{"command", command},
          {"name", cfg.name},
          {"schema_version", cfg.schema_version},
          {"seed", effective_seed(cfg, opt)},
          {"config", cfg.to_json()}};
}

// For lambda != 1 instances of a homogeneous problem (delta = 0, no power
// term) the index of the lambda = 1 instance whose solution is rescaled.
std::vector<std::optional<std::size_t>> replay_sources(const ExperimentConfig& cfg,
                                                       const std::vector<Instance>& instances) {
  std::vector<std::optional<std::size_t>> src(instances.size());
  if (cfg.problem.lower.kind == "power") return src;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& a = instances[i];
    if (a.lambda == 1.0 || std::any_of(a.deltas.begin(), a.deltas.end(), [](double d) { return d != 0.0; }))
      continue;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto& b = instances[k];
      if (b.lambda == 1.0 && b.eps == a.eps && b.nodes == a.nodes && b.p == a.p && b.deltas == a.deltas) {
        src[i] = k;
        break;
      }
    }
  }
  return src;
}

// u -> lambda u solves the lambda-scaled problem exactly; energy scales by
// lambda^p and the residual by lambda^{p-1}.
SolveOutcome replay(const SolveOutcome& base, const ProblemSpec& spec, double lambda) {
  SolveOutcome o = base;
  o.result.u = base.result.u.scaled(lambda);
  o.result.energy = base.result.energy * std::pow(std::abs(lambda), spec.p);
  for (double& r : o.result.residual_history) r *= std::pow(std::abs(lambda), spec.p - 1.0);
  o.result.eps = spec.eps;
  for (double& e : o.schedule) e *= std::pow(lambda, spec.p - 2.0);
  for (double& d : o.distances) d *= std::abs(lambda);
  o.oracle_max_diff.reset();
  o.oracle_residual.reset();
  return o;
}

}  // namespace

SolveOutcome run_solve(const ExperimentConfig& cfg, const ProblemSpec& spec, const Instance& inst, std::uint64_t seed) {
  SolveOutcome o;
  const auto& sc = cfg.solver;
  if (sc.schedule.empty()) {
    std::optional<ScalarField> guess;
    if (sc.random_start > 0.0) guess = perturbed_start(spec, sc.random_start, seed, inst.index);
    o.result = solve_regularized(spec, sc.tol, sc.max_iter, guess);
  } else {
    o.schedule = sc.schedule;
    for (double& e : o.schedule) e *= lambda_eps_factor(inst);
    try {
      auto c = continuation_solve(spec, o.schedule, sc.tol, sc.max_iter);
      o.result = c.steps.back();
      o.distances = c.distances;
    } catch (const std::runtime_error& e) {
      o.result.converged = false;
      o.result.eps = o.schedule.back();
      o.result.u = spec.boundary;
      o.result.message = e.what();
    }
  }
  if (sc.oracle_check) {
    if (spec.free_count() > kOracleMaxUnknowns)
      throw ConfigError("oracle check needs at most " + std::to_string(kOracleMaxUnknowns) + " free nodes");
    const auto ref = coordinate_descent_minimize(spec, 1e-14);
    double m = 0.0;
    for (std::size_t n = 0; n < ref.size(); ++n) m = std::max(m, std::abs(ref[n] - o.result.u[n]));
    o.oracle_max_diff = m;
    o.oracle_residual = el_residual_norm(ref, spec);
  }
  return o;
}

std::vector<InequalityReport> run_checker(const CheckerConfig& chk, const ProblemSpec& spec, const SolveResult& solve,
                                          std::optional<double> budget_override) {
  const double budget = budget_override ? *budget_override : (chk.budget ? *chk.budget : kNoBudget);
  const json& p = chk.params;
  const Grid& g = spec.grid;
  const int dim = g.dim();
  const Geometry geo = geometry(g);
  const Point c = center_of(p, geo, dim);
  const Ball inner{c, num(p, "inner_radius", geo.extent / 8.0)};
  const Ball outer{c, num(p, "outer_radius", geo.extent / 4.0)};
  const ScalarField& u = solve.u;
  const int j = integer(p, "j", 0);
  const int k = integer(p, "k", dim > 1 ? 1 : 0);
  auto map = [&](const char* key, const ScalarMap& fallback) {
    return p.contains(key) ? scalar_map_from_json(p[key]) : fallback;
  };

  try {
    if (chk.name == "caccioppoli")
      return {check_caccioppoli(u, spec, map("phi", ScalarMap::identity()), j, inner, outer, budget)};
    if (chk.name == "weird_caccioppoli")
      return {check_weird_caccioppoli(u, spec, map("phi", ScalarMap::power(1.0)), map("psi", ScalarMap::power(1.0)),
                                      num(p, "theta", 1.0), j, k, inner, outer, budget)};
    if (chk.name == "staircase") {
      if (p.contains("ell0")) return staircase_chain(u, spec, integer(p, "ell0", 1), j, k, inner, outer, budget);
      return {check_staircase(u, spec, integer(p, "s", 1), integer(p, "m", 1), j, k, inner, outer, budget)};
    }
    if (chk.name == "power_caccioppoli")
      return {check_power_caccioppoli(u, spec, integer(p, "ell0", 1), integer(p, "k", 0), inner, outer, budget)};
    if (chk.name == "reverse_holder")
      return {check_reverse_holder(u, spec, num(p, "q", 1.0), c, num(p, "t", geo.extent / 8.0),
                                   num(p, "s", geo.extent / 4.0), num(p, "R", 3.0 * geo.extent / 8.0),
                                   num(p, "h", 3.0), budget)};
    if (chk.name == "lipschitz_estimate")
      return {check_lipschitz_estimate(u, lower_order_field(spec, u), std::nullopt, spec.p, c,
                                       num(p, "R0", geo.extent / 4.0), num(p, "h", 3.0), budget)};
    if (chk.name == "uniform_estimate")
      return {check_uniform_estimate(solve, spec, c, num(p, "r0", geo.extent / 8.0),
                                     num(p, "R0", 3.0 * geo.extent / 8.0), num(p, "sigma1", 1.0),
                                     num(p, "sigma2", 1.0), num(p, "h", 3.0), budget)};
    if (chk.name == "energy_estimate")
      return {energy_estimate_check(solve, spec, Ball{c, num(p, "radius", geo.extent / 8.0)}, budget)};
    if (chk.name == "propagation") {
      auto r = check_propagation(u, spec.boundary, spec.deltas, num(p, "slack", 2.0 * g.min_spacing()));
      if (budget_override || chk.budget) r.finalize(budget);
      return {r};
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError("checker " + chk.name + ": " + e.what());
  }
  throw ConfigError("unknown checker '" + chk.name + "'");
}

int cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  const auto instances = enumerate_instances(cfg);
  const auto seed = effective_seed(cfg, opt);
  std::vector<ProblemSpec> specs(instances.size());
  std::vector<SolveOutcome> outcomes(instances.size());
  parallel_for(instances.size(), opt.threads, [&](std::size_t i) {
    specs[i] = build_spec(cfg, instances[i]);
    outcomes[i] = run_solve(cfg, specs[i], instances[i], seed);
  });
  std::filesystem::create_directories(opt.out / "fields");
  json summary = header("solve", cfg, opt);
  summary["instances"] = json::array();
  bool all = true;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    write_field(outcomes[i].result.u, opt.out / "fields" / ("u_" + std::to_string(i)));
    summary["instances"].push_back(solve_json(outcomes[i], specs[i], instances[i], cfg.solver.tol));
    all = all && outcomes[i].result.converged;
    log << "instance " << i << ": " << (outcomes[i].result.converged ? "converged" : "NOT converged") << " after "
        << outcomes[i].result.iterations << " iterations, residual " << outcomes[i].result.final_residual() << "\n";
  }
  summary["status"] = all ? "ok" : "non_convergence";
  write_json(opt.out / "summary.json", summary);
  return all ? kExitOk : kExitNonConvergence;
}

int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  const auto instances = enumerate_instances(cfg);
  const auto seed = effective_seed(cfg, opt);
  std::vector<ProblemSpec> specs(instances.size());
  std::vector<SolveOutcome> outcomes(instances.size());
  std::vector<std::vector<InequalityReport>> reports(instances.size());
  const auto source = replay_sources(cfg, instances);
  auto solve_one = [&](std::size_t i) {
    specs[i] = build_spec(cfg, instances[i]);
    if (source[i]) {
      outcomes[i] = replay(outcomes[*source[i]], specs[i], instances[i].lambda);
    } else {
      outcomes[i] = run_solve(cfg, specs[i], instances[i], seed);
    }
    if (!outcomes[i].result.converged) return;
    for (const auto& chk : cfg.checkers) {
      auto r = run_checker(chk, specs[i], outcomes[i].result, opt.budget);
      reports[i].insert(reports[i].end(), r.begin(), r.end());
    }
  };
  // unscaled instances first, then the lambda replays of their solutions
  for (bool second : {false, true})
    parallel_for(instances.size(), opt.threads, [&](std::size_t i) {
      if (source[i].has_value() == second) solve_one(i);
    });
  std::filesystem::create_directories(opt.out);
  json summary = header("verify", cfg, opt);
  json all_reports = json::array();
  std::string csv = report_csv_header() + "\n";
  std::size_t failed = 0, total = 0, unconverged = 0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!outcomes[i].result.converged) ++unconverged;
    for (const auto& r : reports[i]) {
      ++total;
      if (!r.pass) ++failed;
      log << "instance " << i << " " << r.name << ": implied constant " << r.implied_constant
          << (r.pass ? "  pass" : "  FAIL") << "\n";
    }
    json entry = {{"instance", instances[i].to_json()},
                  {"solve", solve_json(outcomes[i], specs[i], instances[i], cfg.solver.tol)},
                  {"reports", reports_json(reports[i])}};
    if (source[i]) entry["replay_of"] = *source[i];
    all_reports.push_back(entry);
    csv += report_csv_rows(reports[i], instances[i]);
  }
  summary["reports"] = total;
  summary["failed"] = failed;
  summary["non_converged"] = unconverged;
  summary["all_pass"] = failed == 0 && unconverged == 0;
  write_json(opt.out / "reports.json", all_reports);
  write_text_atomic(opt.out / "reports.csv", csv);
  write_json(opt.out / "summary.json", summary);
  if (unconverged) return kExitNonConvergence;
  return failed ? kExitBudget : kExitOk;
}

int cmd_oracle(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  ExperimentConfig c = cfg;
  c.solver.oracle_check = true;
  const auto instances = enumerate_instances(c);
  const auto seed = effective_seed(c, opt);
  std::vector<ProblemSpec> specs(instances.size());
  std::vector<SolveOutcome> outcomes(instances.size());
  parallel_for(instances.size(), opt.threads, [&](std::size_t i) {
    specs[i] = build_spec(c, instances[i]);
    outcomes[i] = run_solve(c, specs[i], instances[i], seed);
  });
  std::filesystem::create_directories(opt.out);
  json summary = header("oracle", c, opt);
  summary["instances"] = json::array();
  summary["tolerance"] = c.solver.oracle_tolerance;
  bool converged = true, within = true;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& o = outcomes[i];
    converged = converged && o.result.converged;
    within = within && *o.oracle_max_diff <= c.solver.oracle_tolerance;
    summary["instances"].push_back(solve_json(o, specs[i], instances[i], c.solver.tol));
    log << "instance " << i << ": max |solver - oracle| = " << *o.oracle_max_diff << "\n";
  }
  summary["all_within_tolerance"] = within;
  write_json(opt.out / "oracle.json", summary);
  if (!converged) return kExitNonConvergence;
  return within ? kExitOk : kExitBudget;
}

int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log) {
  // eps becomes the continuation schedule of every group
  ExperimentConfig c = cfg;
  std::vector<double> schedule = cfg.solver.schedule;
  if (!cfg.sweep.eps.empty()) {
    schedule = cfg.sweep.eps;
    std::sort(schedule.begin(), schedule.end(), std::greater<>());
    schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  }
  if (schedule.empty()) schedule = {cfg.problem.eps};
  c.sweep.eps.clear();
  c.solver.schedule = schedule;
  const auto groups = enumerate_instances(c);

  struct GroupResult {
    ProblemSpec spec;
    ContinuationResult cont;
    std::string error;
    std::vector<std::vector<InequalityReport>> reports;
    std::vector<UniformSample> samples;
  };
  std::vector<GroupResult> res(groups.size());
  const CheckerConfig* uniform = nullptr;
  for (const auto& chk : c.checkers)
    if (chk.name == "uniform_estimate") uniform = &chk;

  parallel_for(groups.size(), opt.threads, [&](std::size_t gi) {
    auto& r = res[gi];
    r.spec = build_spec(c, groups[gi]);
    try {
      r.cont = continuation_solve(r.spec, schedule, c.solver.tol, c.solver.max_iter);
    } catch (const std::runtime_error& e) {
      r.error = e.what();
      return;
    }
    for (std::size_t k = 0; k < r.cont.steps.size(); ++k) {
      ProblemSpec sk = r.spec;
      sk.eps = schedule[k];
      std::vector<InequalityReport> reps;
      for (const auto& chk : c.checkers) {
        auto out = run_checker(chk, sk, r.cont.steps[k], opt.budget);
        reps.insert(reps.end(), out.begin(), out.end());
      }
      r.reports.push_back(std::move(reps));
      if (uniform) {
        const auto& p = uniform->params;
        const Geometry geo = geometry(sk.grid);
        r.samples.push_back(uniform_sample(r.cont.steps[k], sk, center_of(p, geo, sk.grid.dim()),
                                           num(p, "r0", geo.extent / 8.0), num(p, "R0", 3.0 * geo.extent / 8.0),
                                           num(p, "h", 3.0)));
      }
    }
  });

  std::filesystem::create_directories(opt.out);
  std::string csv = "group," + Instance::csv_header() + ",spacing,converged,iterations,residual,energy,w1p_to_next\n";
  std::string rcsv = report_csv_header() + "\n";
  json summary = header("sweep", c, opt);
  summary["schedule"] = schedule;
  summary["groups"] = json::array();
  bool ok = true;
  std::size_t failed = 0;
  std::vector<UniformSample> samples;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& r = res[gi];
    json gj = {{"instance", groups[gi].to_json()}, {"spacing", r.spec.grid.min_spacing()}};
    if (!r.error.empty()) {
      ok = false;
      gj["error"] = r.error;
      summary["groups"].push_back(gj);
      log << "group " << gi << ": " << r.error << "\n";
      continue;
    }
    gj["w1p_distances"] = r.cont.distances;
    summary["groups"].push_back(gj);
    for (std::size_t k = 0; k < r.cont.steps.size(); ++k) {
      Instance row = groups[gi];
      row.eps = schedule[k];
      const auto& s = r.cont.steps[k];
      csv += std::to_string(gi) + "," + row.csv_fields() + "," + format_double(r.spec.grid.min_spacing()) + "," +
             (s.converged ? "true" : "false") + "," + std::to_string(s.iterations) + "," +
             format_double(s.final_residual()) + "," + format_double(s.energy) + "," +
             (k < r.cont.distances.size() ? format_double(r.cont.distances[k]) : std::string()) + "\n";
      rcsv += report_csv_rows(r.reports[k], row);
      for (const auto& rep : r.reports[k]) failed += !rep.pass;
    }
    samples.insert(samples.end(), r.samples.begin(), r.samples.end());
    log << "group " << gi << ": " << r.cont.steps.size() << " continuation steps\n";
  }
  if (uniform) {
    try {
      const auto fit = fit_uniform_exponents(samples);
      summary["sigma_fit"] = {{"sigma1", fit.sigma1}, {"sigma2", fit.sigma2}, {"log_c", fit.log_c}, {"rms", fit.rms}};
    } catch (const std::invalid_argument& e) {
      summary["sigma_fit"] = {{"error", e.what()}};
    }
  }
  summary["failed_reports"] = failed;
  summary["status"] = ok ? (failed ? "budget_violated" : "ok") : "non_convergence";
  write_text_atomic(opt.out / "sweep.csv", csv);
  write_text_atomic(opt.out / "reports.csv", rcsv);
  write_json(opt.out / "summary.json", summary);
  if (!ok) return kExitNonConvergence;
  return failed ? kExitBudget : kExitOk;
}

int cmd_ladder(Regime regime, const std::string& p, int N, const std::string& h, int j_max,
               const CommandOptions& opt, std::ostream& log) {
  LadderTable t;
  try {
    t = ladder(regime, parse_rational(p), N, parse_rational(h), j_max);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const TauCheck check = tau_check(t);
  log << t.to_text();
  log << "tau check: " << (check.ok() ? "pass" : "FAIL") << "\n";
  json j = t.to_json();
  j["tau_check"] = {{"tau_in_unit_interval", check.tau_in_unit_interval},
                    {"tau_above_bar", check.tau_above_bar},
                    {"tau_decreasing", check.tau_decreasing},
                    {"gamma_ratio_in_2_4", check.gamma_ratio_in_2_4}};
  std::filesystem::create_directories(opt.out);
  write_json(opt.out / "ladder.json", j);
  return kExitOk;
}

}  // namespace ortholip
