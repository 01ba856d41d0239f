#pragma once

// Experiment orchestration behind the command-line tool. Every command writes
// its bundle into an output directory, one file at a time through
// write_text_atomic, and returns a process exit code.

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ortholip/config.hpp"
#include "ortholip/ladder.hpp"
#include "ortholip/report.hpp"
#include "ortholip/solver.hpp"
#include "ortholip/verify.hpp"

namespace ortholip {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNonConvergence = 3,
  kExitBudget = 4,
};

struct CommandOptions {
  std::filesystem::path out = "out";
  std::optional<double> budget;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
};

/// Runs fn(0..count-1) on up to `threads` workers. Results must be written by
/// index; the first exception (lowest index) is rethrown after all workers end.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Worker count from --threads and the ORTHOLIP_THREADS environment variable
/// (which wins when set). Throws ConfigError on a malformed value.
unsigned resolve_threads(std::optional<unsigned> flag);

ScalarMap scalar_map_from_json(const nlohmann::json& j);

struct SolveOutcome {
  SolveResult result;
  std::vector<double> schedule;
  std::vector<double> distances;
  std::optional<double> oracle_max_diff;
  std::optional<double> oracle_residual;
};

/// Single solve, or continuation when the solver schedule is set. Does not
/// throw on non-convergence; `result.converged` reports it.
SolveOutcome run_solve(const ExperimentConfig& cfg, const ProblemSpec& spec, const Instance& inst,
                       std::uint64_t seed);

/// Reports of one configured checker on one solved instance. Budget precedence:
/// override, then the checker's own budget, then none.
std::vector<InequalityReport> run_checker(const CheckerConfig& chk, const ProblemSpec& spec,
                                          const SolveResult& solve, std::optional<double> budget_override);

int cmd_solve(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_oracle(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt, std::ostream& log);
int cmd_ladder(Regime regime, const std::string& p, int N, const std::string& h, int j_max,
               const CommandOptions& opt, std::ostream& log);

}  // namespace ortholip
