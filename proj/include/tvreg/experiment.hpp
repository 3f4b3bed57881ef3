#ifndef TVREG_EXPERIMENT_HPP
#define TVREG_EXPERIMENT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tvreg/analysis.hpp"
#include "tvreg/param_choice.hpp"
#include "tvreg/solver.hpp"

namespace tvreg {

// Config files hold `key = value` lines; `#` starts a comment and lists are
// comma-separated. Recognised keys:
//
//   grid, extent          point counts and side lengths, e.g. 32,32 / 1,1
//   phantom               phantom spec (see phantom.hpp), or
//   truth_file            a TVF1 field used as ground truth instead
//   operator              identity | blur:sigma=..,boundary=.. | matrix:path=..
//   beta, deltas, rule, seed
//   delta_scale           relative (default, deltas times |T phi|_2) | absolute
//   method, grad_tol, max_outer, cg_tol, cg_max
//   tau, kappa            optional overrides
//   slope_min, slope_max  optional bounds on the fitted convergence slope
//   require_monotone      true | false
//   verify                true | false, inequality checks on the truth and
//                         on successive solutions
//   out_dir               default output directory, relative to the working
//                         directory
//
// Relative input paths are resolved against the config file's directory.
struct ExperimentConfig {
  std::vector<std::size_t> shape;
  std::vector<double> extent;
  std::string phantom;
  std::filesystem::path truth_file;
  std::string op = "identity";
  double beta = 0.01;
  std::vector<double> deltas;
  bool relative_deltas = true;
  AlphaRule rule = AlphaRule::rule3_delta;
  SolveOptions solve;
  std::uint64_t seed = 1;
  std::optional<double> tau;
  std::optional<double> kappa;
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  bool require_monotone = false;
  bool verify = true;
  std::filesystem::path out_dir = "out";
};

/// Parses config text. Referenced files must exist; a missing one raises an
/// Error naming the path.
ExperimentConfig parse_config(const std::string& text,
                              const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Rewrites `matrix:path=p` so that p is resolved against base_dir.
std::string resolve_operator_spec(const std::string& spec,
                                  const std::filesystem::path& base_dir);

struct NamedCheck {
  std::string instance;
  TheoremCheckReport report;
};

struct CorpusField {
  std::string name;
  ScalarField field;
};

struct CorpusVerification {
  std::vector<NamedCheck> checks;
  /// Largest Morrey ratio over nonconstant instances and where it occurred.
  double morrey_max = 0.0;
  std::string morrey_argmax;
  bool all_passed = true;
};

/// The six inequality checks per instance; the successive-TV pair of an
/// instance is the next instance on the same grid, cyclically.
CorpusVerification verify_corpus(const std::vector<CorpusField>& corpus,
                                 double beta);

/// Reads every *.tvf file in `dir`, ordered by file name.
std::vector<CorpusField> load_corpus(const std::filesystem::path& dir);

/// Writes <name>.tvf for every standard corpus entry plus corpus.csv.
void write_standard_corpus(const std::filesystem::path& dir);

std::string csv_escape(const std::string& field);
std::string checks_csv(const std::vector<NamedCheck>& checks);
std::string sweep_csv(const SweepResult& sweep);
std::string solve_report_json(const SolveResult& res);

struct RunOutcome {
  int exit_code = 0;
  SweepResult sweep;
  std::vector<NamedCheck> checks;
  std::vector<std::string> failures;
};

/// phantom -> forward -> noise -> alpha -> solve -> verify -> reports.
/// Writes sweep.csv, verify.csv, report.json and solution_<k>.tvf into
/// out_dir. Exit code 0 when all requested checks pass, 2 otherwise.
RunOutcome run_experiment(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir);

}  // namespace tvreg

#endif  // TVREG_EXPERIMENT_HPP
