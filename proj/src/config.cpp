#include "ortholip/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ortholip/field_io.hpp"

namespace ortholip {

using nlohmann::json;

namespace {

void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

const std::set<std::string> kCheckers = {"caccioppoli",        "weird_caccioppoli", "staircase",
                                         "power_caccioppoli",  "reverse_holder",    "lipschitz_estimate",
                                         "uniform_estimate",   "propagation",       "energy_estimate"};

Grid refine(const Grid& g, std::size_t n) {
  std::vector<std::size_t> nodes(g.dim(), n);
  std::vector<double> h(g.dim()), o(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    o[a] = g.origin(a);
    h[a] = (g.upper(a) - g.origin(a)) / static_cast<double>(n - 1);
  }
  return Grid(nodes, h, o);
}

std::string join_deltas(const std::vector<double>& d) {
  std::string s;
  for (std::size_t i = 0; i < d.size(); ++i) s += (i ? ":" : "") + format_double(d[i]);
  return s;
}

}  // namespace

FieldExpr FieldExpr::constant(double v) {
  FieldExpr e;
  e.kind = "constant";
  e.value = v;
  return e;
}

ScalarField FieldExpr::evaluate(const Grid& grid, const std::filesystem::path& base_dir) const {
  const int dim = grid.dim();
  auto need_dim = [&](const std::vector<double>& v, const char* what) {
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError(std::string("field '") + kind + "': " + what + " needs " + std::to_string(dim) + " entries");
  };
  if (kind == "zero") return ScalarField(grid, 0.0);
  if (kind == "constant") return ScalarField(grid, value);
  if (kind == "affine") {
    need_dim(gradient, "gradient");
    return ScalarField::sample(grid, [&](const Point& x) {
      double v = offset;
      for (int a = 0; a < dim; ++a) v += gradient[a] * x[a];
      return v;
    });
  }
  if (kind == "polynomial") {
    for (const auto& m : terms)
      if (static_cast<int>(m.powers.size()) != dim) throw ConfigError("field 'polynomial': powers need one entry per axis");
    return ScalarField::sample(grid, [&](const Point& x) {
      double v = 0.0;
      for (const auto& m : terms) {
        double t = m.coef;
        for (int a = 0; a < dim; ++a) t *= std::pow(x[a], m.powers[a]);
        v += t;
      }
      return v;
    });
  }
  if (kind == "sine") {
    need_dim(wave, "wave");
    return ScalarField::sample(grid, [&](const Point& x) {
      double arg = phase;
      for (int a = 0; a < dim; ++a) arg += wave[a] * x[a];
      return amplitude * std::sin(arg) + offset;
    });
  }
  if (kind == "file") {
    ScalarField f;
    try {
      f = read_field(base_dir / path);
    } catch (const std::exception& e) {
      throw ConfigError("field file '" + path + "': " + e.what());
    }
    if (!f.grid.same_layout(grid)) throw ConfigError("field file '" + path + "' lives on a different grid");
    return ScalarField(grid, f.values);
  }
  throw ConfigError("unknown field kind '" + kind + "'");
}

json FieldExpr::to_json() const {
  json j = {{"kind", kind}};
  if (kind == "constant") j["value"] = value;
  if (kind == "affine") {
    j["gradient"] = gradient;
    j["offset"] = offset;
  }
  if (kind == "polynomial") {
    j["terms"] = json::array();
    for (const auto& m : terms) j["terms"].push_back({{"coef", m.coef}, {"powers", m.powers}});
  }
  if (kind == "sine") {
    j["amplitude"] = amplitude;
    j["wave"] = wave;
    j["phase"] = phase;
    j["offset"] = offset;
  }
  if (kind == "file") j["path"] = path;
  return j;
}

FieldExpr FieldExpr::from_json(const json& j) {
  const std::string where = "field";
  FieldExpr e;
  e.kind = get<std::string>(j, "kind", where);
  if (e.kind == "zero") {
    allow_keys(j, {"kind"}, where);
  } else if (e.kind == "constant") {
    allow_keys(j, {"kind", "value"}, where);
    e.value = get<double>(j, "value", where);
  } else if (e.kind == "affine") {
    allow_keys(j, {"kind", "gradient", "offset"}, where);
    e.gradient = get<std::vector<double>>(j, "gradient", where);
    e.offset = get_or<double>(j, "offset", 0.0, where);
  } else if (e.kind == "polynomial") {
    allow_keys(j, {"kind", "terms"}, where);
    for (const auto& t : get<json>(j, "terms", where)) {
      allow_keys(t, {"coef", "powers"}, "polynomial term");
      Monomial m{get<double>(t, "coef", "polynomial term"), get<std::vector<int>>(t, "powers", "polynomial term")};
      for (int pw : m.powers)
        if (pw < 0) throw ConfigError("polynomial term: powers must be >= 0");
      e.terms.push_back(m);
    }
  } else if (e.kind == "sine") {
    allow_keys(j, {"kind", "amplitude", "wave", "phase", "offset"}, where);
    e.amplitude = get<double>(j, "amplitude", where);
    e.wave = get<std::vector<double>>(j, "wave", where);
    e.phase = get_or<double>(j, "phase", 0.0, where);
    e.offset = get_or<double>(j, "offset", 0.0, where);
  } else if (e.kind == "file") {
    allow_keys(j, {"kind", "path"}, where);
    e.path = get<std::string>(j, "path", where);
  } else {
    throw ConfigError("unknown field kind '" + e.kind + "'");
  }
  return e;
}

json LowerExpr::to_json() const {
  if (kind == "linear") return {{"kind", kind}, {"f", field.to_json()}};
  if (kind == "power") return {{"kind", kind}, {"c", field.to_json()}, {"b", b}, {"gamma", gamma}};
  return {{"kind", "none"}};
}

LowerExpr LowerExpr::from_json(const json& j) {
  const std::string where = "lower";
  LowerExpr l;
  l.kind = get<std::string>(j, "kind", where);
  if (l.kind == "none") {
    allow_keys(j, {"kind"}, where);
  } else if (l.kind == "linear") {
    allow_keys(j, {"kind", "f"}, where);
    l.field = FieldExpr::from_json(get<json>(j, "f", where));
  } else if (l.kind == "power") {
    allow_keys(j, {"kind", "c", "b", "gamma"}, where);
    l.field = j.contains("c") ? FieldExpr::from_json(j["c"]) : FieldExpr{};
    l.b = get<double>(j, "b", where);
    l.gamma = get<double>(j, "gamma", where);
  } else {
    throw ConfigError("unknown lower-order kind '" + l.kind + "'");
  }
  return l;
}

Ball ball_from_json(const json& j, int dim) {
  allow_keys(j, {"center", "radius"}, "ball");
  const auto c = get<std::vector<double>>(j, "center", "ball");
  if (static_cast<int>(c.size()) != dim) throw ConfigError("ball: center needs one entry per axis");
  Ball b;
  for (int a = 0; a < dim; ++a) b.center[a] = c[a];
  b.radius = get<double>(j, "radius", "ball");
  if (!(b.radius > 0.0)) throw ConfigError("ball: radius must be positive");
  return b;
}

json ball_to_json(const Ball& b, int dim) {
  return {{"center", std::vector<double>(b.center.begin(), b.center.begin() + dim)}, {"radius", b.radius}};
}

json ProblemConfig::to_json() const {
  json j = {{"grid", grid_to_json(grid)},
            {"p", p},
            {"deltas", deltas},
            {"eps", eps},
            {"eps0", eps0},
            {"boundary", boundary.to_json()},
            {"lower", lower.to_json()},
            {"smooth_p2_kink", smooth_p2_kink}};
  if (domain) j["domain"] = ball_to_json(*domain, grid.dim());
  return j;
}

ProblemConfig ProblemConfig::from_json(const json& j) {
  const std::string where = "problem";
  allow_keys(j, {"grid", "p", "deltas", "eps", "eps0", "domain", "boundary", "lower", "smooth_p2_kink"}, where);
  ProblemConfig c;
  try {
    c.grid = grid_from_json(get<json>(j, "grid", where));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("problem.grid: ") + e.what());
  }
  c.p = get_or<double>(j, "p", 2.0, where);
  c.deltas = get_or<std::vector<double>>(j, "deltas", std::vector<double>(c.grid.dim(), 0.0), where);
  c.eps = get_or<double>(j, "eps", 0.1, where);
  c.eps0 = get_or<double>(j, "eps0", 0.5, where);
  if (j.contains("domain")) c.domain = ball_from_json(j["domain"], c.grid.dim());
  c.boundary = FieldExpr::from_json(get<json>(j, "boundary", where));
  if (j.contains("lower")) c.lower = LowerExpr::from_json(j["lower"]);
  c.smooth_p2_kink = get_or<bool>(j, "smooth_p2_kink", true, where);
  return c;
}

json SolverConfig::to_json() const {
  return {{"tol", tol},
          {"max_iter", max_iter},
          {"schedule", schedule},
          {"oracle_check", oracle_check},
          {"oracle_tolerance", oracle_tolerance},
          {"random_start", random_start}};
}

SolverConfig SolverConfig::from_json(const json& j) {
  const std::string where = "solver";
  allow_keys(j, {"tol", "max_iter", "schedule", "oracle_check", "oracle_tolerance", "random_start"}, where);
  SolverConfig s;
  s.tol = get_or<double>(j, "tol", s.tol, where);
  s.max_iter = get_or<int>(j, "max_iter", s.max_iter, where);
  s.schedule = get_or<std::vector<double>>(j, "schedule", {}, where);
  s.oracle_check = get_or<bool>(j, "oracle_check", false, where);
  s.oracle_tolerance = get_or<double>(j, "oracle_tolerance", s.oracle_tolerance, where);
  s.random_start = get_or<double>(j, "random_start", 0.0, where);
  if (!(s.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (s.max_iter < 0) throw ConfigError("solver.max_iter must be >= 0");
  if (!(s.oracle_tolerance > 0.0)) throw ConfigError("solver.oracle_tolerance must be positive");
  if (!(s.random_start >= 0.0)) throw ConfigError("solver.random_start must be >= 0");
  for (std::size_t k = 1; k < s.schedule.size(); ++k)
    if (!(s.schedule[k] < s.schedule[k - 1])) throw ConfigError("solver.schedule must be strictly decreasing");
  return s;
}

json CheckerConfig::to_json() const {
  json j = {{"name", name}, {"params", params}};
  j["budget"] = budget ? json(*budget) : json(nullptr);
  return j;
}

CheckerConfig CheckerConfig::from_json(const json& j) {
  const std::string where = "checker";
  allow_keys(j, {"name", "budget", "params"}, where);
  CheckerConfig c;
  c.name = get<std::string>(j, "name", where);
  if (!kCheckers.count(c.name)) throw ConfigError("unknown checker '" + c.name + "'");
  if (j.contains("budget") && !j["budget"].is_null()) {
    c.budget = get<double>(j, "budget", where);
    if (!(*c.budget >= 0.0)) throw ConfigError("checker budget must be >= 0");
  }
  if (j.contains("params")) {
    c.params = j["params"];
    if (!c.params.is_object()) throw ConfigError("checker params must be an object");
  }
  return c;
}

json SweepConfig::to_json() const {
  json j = json::object();
  if (!eps.empty()) j["eps"] = eps;
  if (!nodes.empty()) j["nodes"] = nodes;
  if (!p.empty()) j["p"] = p;
  if (!deltas.empty()) j["deltas"] = deltas;
  if (!lambda.empty()) j["lambda"] = lambda;
  return j;
}

SweepConfig SweepConfig::from_json(const json& j) {
  const std::string where = "sweep";
  allow_keys(j, {"eps", "nodes", "p", "deltas", "lambda"}, where);
  SweepConfig s;
  auto axis = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    out = get<std::decay_t<decltype(out)>>(j, key, where);
    if (out.empty()) throw ConfigError(std::string("sweep.") + key + " must not be empty");
  };
  axis("eps", s.eps);
  axis("nodes", s.nodes);
  axis("p", s.p);
  axis("deltas", s.deltas);
  axis("lambda", s.lambda);
  for (std::size_t n : s.nodes)
    if (n < 3) throw ConfigError("sweep.nodes entries must be >= 3");
  return s;
}

json ExperimentConfig::to_json() const {
  json checks = json::array();
  for (const auto& c : checkers) checks.push_back(c.to_json());
  return {{"schema_version", schema_version}, {"name", name},           {"seed", seed},
          {"output", output},                 {"problem", problem.to_json()}, {"solver", solver.to_json()},
          {"checkers", checks},               {"sweep", sweep.to_json()}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string where = "config";
  allow_keys(j, {"schema_version", "name", "seed", "output", "problem", "solver", "checkers", "sweep"}, where);
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.schema_version = get<int>(j, "schema_version", where);
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
  c.name = get_or<std::string>(j, "name", c.name, where);
  c.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  c.output = get_or<std::string>(j, "output", c.output, where);
  c.problem = ProblemConfig::from_json(get<json>(j, "problem", where));
  if (j.contains("solver")) c.solver = SolverConfig::from_json(j["solver"]);
  if (j.contains("checkers")) {
    if (!j["checkers"].is_array()) throw ConfigError("checkers must be an array");
    for (const auto& cj : j["checkers"]) c.checkers.push_back(CheckerConfig::from_json(cj));
  }
  if (j.contains("sweep")) c.sweep = SweepConfig::from_json(j["sweep"]);
  for (const auto& inst : enumerate_instances(c)) build_spec(c, inst);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return ExperimentConfig::from_json(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

json Instance::to_json() const {
  return {{"index", index}, {"eps", eps}, {"nodes", nodes}, {"p", p}, {"deltas", deltas}, {"lambda", lambda}};
}

std::string Instance::csv_fields() const {
  return format_double(eps) + "," + std::to_string(nodes) + "," + format_double(p) + "," + join_deltas(deltas) + "," +
         format_double(lambda);
}

double lambda_eps_factor(const Instance& inst) { return std::pow(inst.lambda, inst.p - 2.0); }

std::string Instance::csv_header() { return "eps,nodes,p,delta,lambda"; }

std::vector<Instance> enumerate_instances(const ExperimentConfig& cfg) {
  const auto& s = cfg.sweep;
  const auto& pr = cfg.problem;
  const std::vector<double> ps = s.p.empty() ? std::vector<double>{pr.p} : s.p;
  const auto ds = s.deltas.empty() ? std::vector<std::vector<double>>{pr.deltas} : s.deltas;
  const std::vector<std::size_t> ns = s.nodes.empty() ? std::vector<std::size_t>{0} : s.nodes;
  const std::vector<double> ls = s.lambda.empty() ? std::vector<double>{1.0} : s.lambda;
  const std::vector<double> es = s.eps.empty() ? std::vector<double>{pr.eps} : s.eps;
  std::vector<Instance> out;
  for (double p : ps)
    for (const auto& d : ds)
      for (std::size_t n : ns)
        for (double l : ls)
          for (double e : es) {
            Instance i;
            i.index = out.size();
            i.eps = e;
            i.nodes = n;
            i.p = p;
            i.deltas = d;
            i.lambda = l;
            out.push_back(i);
          }
  return out;
}

ProblemSpec build_spec(const ExperimentConfig& cfg, const Instance& inst) {
  const auto& pr = cfg.problem;
  ProblemSpec s;
  try {
    s.grid = inst.nodes ? refine(pr.grid, inst.nodes) : pr.grid;
    s.p = inst.p;
    if (static_cast<int>(inst.deltas.size()) != s.grid.dim()) throw ConfigError("deltas need one entry per axis");
    s.deltas = DegeneracyVector(inst.deltas);
    s.eps = (cfg.solver.schedule.empty() ? inst.eps : cfg.solver.schedule.back()) * lambda_eps_factor(inst);
    s.eps0 = pr.eps0;
    s.domain = pr.domain;
    s.smooth_p2_kink = pr.smooth_p2_kink;
    s.boundary = pr.boundary.evaluate(s.grid, cfg.base_dir).scaled(inst.lambda);
    if (pr.lower.kind == "linear") {
      s.lower = LinearTerm{pr.lower.field.evaluate(s.grid, cfg.base_dir).scaled(std::pow(inst.lambda, s.p - 1.0)),
                           std::nullopt};
    } else if (pr.lower.kind == "power") {
      if (inst.lambda != 1.0) throw ConfigError("lambda scaling is only defined without a power lower-order term");
      s.lower = make_power_term(pr.lower.field.evaluate(s.grid, cfg.base_dir), pr.lower.b, pr.lower.gamma);
    }
    s.validate(true);
    if (!cfg.solver.schedule.empty() && cfg.solver.schedule.front() > s.eps0)
      throw ConfigError("solver.schedule must stay within (0, eps0]");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("instance ") + std::to_string(inst.index) + ": " + e.what());
  }
  return s;
}

}  // namespace ortholip
