#pragma once

// JSON experiment configuration.
//
// {
//   "schema_version": 1,
//   "name": "demo",
//   "seed": 0,
//   "output": "out",
//   "problem": {
//     "grid": {"dim": 2, "nodes_per_axis": [17, 17], "spacing": [0.125, 0.125], "origin": [-1, -1]},
//     "p": 3, "deltas": [0.2, 0.1], "eps": 0.01, "eps0": 0.5,
//     "domain": {"center": [0, 0], "radius": 0.9},          (optional)
//     "boundary": {"kind": "affine", "gradient": [1, 0.5], "offset": 0},
//     "lower": {"kind": "linear", "f": {"kind": "constant", "value": 1}},
//     "smooth_p2_kink": true
//   },
//   "solver": {"tol": 1e-10, "max_iter": 200, "schedule": [], "oracle_check": false,
//              "oracle_tolerance": 1e-8, "random_start": 0},
//   "checkers": [{"name": "caccioppoli", "budget": 100, "params": {...}}],
//   "sweep": {"eps": [...], "nodes": [...], "p": [...], "deltas": [[...]], "lambda": [...]}
// }
//
// Field expressions ("kind"):
//   zero; constant {value}; affine {gradient, offset};
//   polynomial {terms: [{coef, powers}]}; sine {amplitude, wave, phase, offset}
//   (amplitude sin(wave . x + phase) + offset); file {path} (a field written by
//   write_field, path relative to the config file).
// Lower-order terms: none; linear {f}; power {c, b, gamma} for
//   G(x, xi) = (b/gamma)|xi|^gamma + c(x) xi.
// Parsing is strict: unknown keys are rejected. Serialization writes every key
// of the parsed form, so parse -> serialize -> parse is the identity.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ortholip/energy.hpp"

namespace ortholip {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;

struct Monomial {
  double coef = 0.0;
  std::vector<int> powers;
  bool operator==(const Monomial&) const = default;
};

struct FieldExpr {
  std::string kind = "zero";
  double value = 0.0;
  std::vector<double> gradient;
  double offset = 0.0;
  std::vector<Monomial> terms;
  double amplitude = 0.0;
  std::vector<double> wave;
  double phase = 0.0;
  std::string path;

  static FieldExpr constant(double v);
  ScalarField evaluate(const Grid& grid, const std::filesystem::path& base_dir) const;
  nlohmann::json to_json() const;
  static FieldExpr from_json(const nlohmann::json& j);
  bool operator==(const FieldExpr&) const = default;
};

struct LowerExpr {
  std::string kind = "none";
  FieldExpr field;  // f (linear) or c (power)
  double b = 1.0;
  double gamma = 2.0;

  nlohmann::json to_json() const;
  static LowerExpr from_json(const nlohmann::json& j);
  bool operator==(const LowerExpr&) const = default;
};

struct ProblemConfig {
  Grid grid;
  double p = 2.0;
  std::vector<double> deltas;
  double eps = 0.1;
  double eps0 = 0.5;
  std::optional<Ball> domain;
  FieldExpr boundary;
  LowerExpr lower;
  bool smooth_p2_kink = true;

  nlohmann::json to_json() const;
  static ProblemConfig from_json(const nlohmann::json& j);
};

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 200;
  /// eps-continuation schedule; empty means a single solve at problem.eps
  std::vector<double> schedule;
  bool oracle_check = false;
  double oracle_tolerance = 1e-8;
  /// amplitude of a seeded uniform perturbation of the initial guess
  double random_start = 0.0;

  nlohmann::json to_json() const;
  static SolverConfig from_json(const nlohmann::json& j);
  bool operator==(const SolverConfig&) const = default;
};

struct CheckerConfig {
  std::string name;
  std::optional<double> budget;
  nlohmann::json params = nlohmann::json::object();

  nlohmann::json to_json() const;
  static CheckerConfig from_json(const nlohmann::json& j);
};

/// Absent axes keep the problem's value. "nodes" refines the grid over the
/// same extent; "lambda" scales the boundary data by lambda, a linear f by
/// lambda^{p-1} and eps by lambda^{p-2}.
struct SweepConfig {
  std::vector<double> eps;
  std::vector<std::size_t> nodes;
  std::vector<double> p;
  std::vector<std::vector<double>> deltas;
  std::vector<double> lambda;

  nlohmann::json to_json() const;
  static SweepConfig from_json(const nlohmann::json& j);
  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::string output = "out";
  ProblemConfig problem;
  SolverConfig solver;
  std::vector<CheckerConfig> checkers;
  SweepConfig sweep;
  /// directory that relative file paths refer to; not serialized
  std::filesystem::path base_dir = ".";

  nlohmann::json to_json() const;
  /// Throws ConfigError on schema or validation errors.
  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = ".");
};

ExperimentConfig load_config(const std::filesystem::path& path);

/// One point of the sweep grid.
struct Instance {
  std::size_t index = 0;
  double eps = 0.0;
  std::size_t nodes = 0;  // 0: the problem's own grid
  double p = 2.0;
  std::vector<double> deltas;
  double lambda = 1.0;

  nlohmann::json to_json() const;
  /// "eps,nodes,p,delta,lambda" with deltas joined by ':'
  std::string csv_fields() const;
  static std::string csv_header();
};

/// eps of a lambda-scaled instance is multiplied by lambda^{p-2}, which makes
/// lambda times the unscaled minimizer the exact minimizer when delta = 0.
double lambda_eps_factor(const Instance& inst);

/// Cartesian product of the sweep axes, ordered p, deltas, nodes, lambda, eps
/// (eps fastest).
std::vector<Instance> enumerate_instances(const ExperimentConfig& cfg);

/// Builds and validates the spec of one instance. Throws ConfigError.
ProblemSpec build_spec(const ExperimentConfig& cfg, const Instance& inst);

Ball ball_from_json(const nlohmann::json& j, int dim);
nlohmann::json ball_to_json(const Ball& b, int dim);

}  // namespace ortholip
