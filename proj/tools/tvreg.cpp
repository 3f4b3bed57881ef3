// tvreg: command-line front end for phantoms, solves, alpha choice,
// inequality verification and noise sweeps.
//
// Exit codes: 0 success, 2 a requested check failed, 1 operational error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tvreg/analysis.hpp"
#include "tvreg/experiment.hpp"
#include "tvreg/io.hpp"
#include "tvreg/operators.hpp"
#include "tvreg/param_choice.hpp"
#include "tvreg/phantom.hpp"
#include "tvreg/solver.hpp"
#include "tvreg/spec_string.hpp"

namespace fs = std::filesystem;
using namespace tvreg;

namespace {

constexpr int kCheckFailed = 2;

Grid grid_from(const std::string& shape_text, const std::string& extent_text) {
  std::vector<std::size_t> shape;
  for (double n : parse_double_list(shape_text, "--grid")) {
    if (n < 2 || n != static_cast<double>(static_cast<std::size_t>(n))) {
      throw Error("--grid entries must be integers >= 2");
    }
    shape.push_back(static_cast<std::size_t>(n));
  }
  std::vector<double> extent = extent_text.empty()
                                   ? std::vector<double>(shape.size(), 1.0)
                                   : parse_double_list(extent_text, "--extent");
  if (extent.size() != shape.size()) {
    throw Error("--grid and --extent have different lengths");
  }
  return Grid::box(shape, extent);
}

struct SolverFlags {
  std::string method = "lagged";
  double grad_tol = 1e-8;
  std::size_t max_outer = 2000;

  void add(CLI::App* app) {
    app->add_option("--method", method, "gd | lagged")->capture_default_str();
    app->add_option("--grad-tol", grad_tol)->capture_default_str();
    app->add_option("--max-outer", max_outer)->capture_default_str();
  }
  SolveOptions options() const {
    SolveOptions o;
    o.method = parse_method(method);
    o.grad_tol = grad_tol;
    o.max_outer = max_outer;
    return o;
  }
};

std::optional<double> parse_kappa(const std::string& text) {
  if (text.empty() || text == "auto") return std::nullopt;
  const double k = parse_double(text, "--kappa");
  if (!(k > 0.0)) throw Error("--kappa must be > 0 or auto");
  return k;
}

void check_tau(const std::optional<double>& tau) {
  if (tau && !(*tau >= 1.0)) {
    throw Error("--tau must be >= 1 for the discrepancy principle, got " +
                io::format_double(*tau));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smoothed total-variation regularization toolkit"};
  app.require_subcommand(1);

  // phantom
  auto* ph = app.add_subcommand("phantom", "Write a phantom field (TVF1)");
  std::string ph_spec, ph_grid, ph_extent, ph_out, ph_corpus;
  ph->add_option("--spec", ph_spec, "e.g. ramp:a=2 or sine:k=1,amplitude=1");
  ph->add_option("--grid", ph_grid, "point counts, e.g. 16,16,16");
  ph->add_option("--extent", ph_extent, "side lengths (default 1 each)");
  ph->add_option("--out", ph_out, "output .tvf path");
  ph->add_option("--standard-corpus", ph_corpus,
                 "write the twelve-phantom corpus into this directory");

  // solve
  auto* sv = app.add_subcommand("solve", "Minimize the smoothed TV objective");
  std::string sv_op = "identity", sv_data, sv_out, sv_report;
  double sv_alpha = 0.0, sv_beta = 0.0;
  SolverFlags sv_flags;
  sv->add_option("--operator,--op", sv_op)->capture_default_str();
  sv->add_option("--data", sv_data, "f_delta as .tvf")->required();
  sv->add_option("--alpha", sv_alpha)->required();
  sv->add_option("--beta", sv_beta)->required();
  sv->add_option("--out", sv_out, "write phi_alpha as .tvf");
  sv->add_option("--report", sv_report, "write a JSON solve report");
  sv_flags.add(sv);

  // choose-alpha
  auto* ca = app.add_subcommand("choose-alpha", "Pick alpha by a rule");
  std::string ca_op = "identity", ca_data, ca_rule = "rule3", ca_report,
              ca_out;
  double ca_delta = 0.0, ca_beta = 0.0;
  std::string ca_kappa = "auto";
  std::optional<double> ca_tau;
  SolverFlags ca_flags;
  ca->add_option("--operator,--op", ca_op)->capture_default_str();
  ca->add_option("--data", ca_data, "f_delta as .tvf")->required();
  ca->add_option("--delta", ca_delta)->required();
  ca->add_option("--beta", ca_beta)->required();
  ca->add_option("--rule", ca_rule, "rule1 | rule2 | rule3 | morozov")
      ->capture_default_str();
  ca->add_option("--kappa", ca_kappa, "auto or a fixed Lipschitz constant")
      ->capture_default_str();
  ca->add_option("--tau", ca_tau, "override tau (>= 1)");
  ca->add_option("--out", ca_out, "write phi_alpha as .tvf");
  ca->add_option("--report", ca_report, "write a JSON solve report");
  ca_flags.add(ca);

  // verify
  auto* vf = app.add_subcommand("verify", "Run the inequality checks");
  std::string vf_corpus, vf_report;
  double vf_beta = 0.01;
  vf->add_option("--corpus", vf_corpus, "directory of .tvf fields")->required();
  vf->add_option("--beta", vf_beta)->capture_default_str();
  vf->add_option("--report", vf_report, "output CSV path (or 'csv' for stdout)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Noise-level sweep");
  std::string sw_op = "identity", sw_phantom = "sine:k=1,amplitude=1",
              sw_grid = "32,32", sw_extent, sw_deltas = "0.1,0.05,0.02,0.01",
              sw_scale = "relative", sw_rule = "rule3", sw_report;
  double sw_beta = 0.01;
  std::uint64_t sw_seed = 1;
  std::string sw_kappa = "auto";
  std::optional<double> sw_tau;
  SolverFlags sw_flags;
  sw->add_option("--operator,--op", sw_op)->capture_default_str();
  sw->add_option("--phantom", sw_phantom)->capture_default_str();
  sw->add_option("--grid", sw_grid)->capture_default_str();
  sw->add_option("--extent", sw_extent);
  sw->add_option("--deltas", sw_deltas)->capture_default_str();
  sw->add_option("--delta-scale", sw_scale, "relative | absolute")
      ->capture_default_str();
  sw->add_option("--rule", sw_rule)->capture_default_str();
  sw->add_option("--beta", sw_beta)->capture_default_str();
  sw->add_option("--seed", sw_seed)->capture_default_str();
  sw->add_option("--kappa", sw_kappa, "auto or a fixed Lipschitz constant")
      ->capture_default_str();
  sw->add_option("--tau", sw_tau);
  sw->add_option("--report", sw_report, "output CSV path");
  sw_flags.add(sw);

  // run
  auto* rn = app.add_subcommand("run", "Run an experiment config");
  std::string rn_cfg, rn_out;
  rn->add_option("config", rn_cfg)->required();
  rn->add_option("--out-dir", rn_out, "overrides out_dir from the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ph) {
      if (!ph_corpus.empty()) {
        write_standard_corpus(ph_corpus);
        std::cout << "wrote " << standard_corpus().size() << " phantoms to "
                  << ph_corpus << "\n";
        return 0;
      }
      if (ph_spec.empty() || ph_grid.empty() || ph_out.empty()) {
        throw Error("phantom needs --spec, --grid and --out "
                    "(or --standard-corpus)");
      }
      const Phantom p = make_phantom(ph_spec, grid_from(ph_grid, ph_extent));
      io::write_field(ph_out, p.field);
      std::cout << "digest " << io::digest(p.field) << "\n";
      if (p.analytic_kappa) {
        std::cout << "analytic_kappa " << io::format_double(*p.analytic_kappa)
                  << "\n";
      }
      return 0;
    }

    if (*sv) {
      const ScalarField f = io::read_field(sv_data);
      const Objective obj{parse_operator(sv_op, f.grid()), f, sv_alpha,
                          sv_beta};
      const SolveResult r = solve(obj, sv_flags.options());
      if (!sv_out.empty()) io::write_field(sv_out, r.phi_alpha);
      if (!sv_report.empty()) io::write_text(sv_report, solve_report_json(r));
      std::cout << "converged " << (r.converged ? "true" : "false")
                << " outer " << r.outer_iterations << " residual "
                << io::format_double(r.optimality_residual) << "\n";
      if (!r.converged) std::cerr << "tvreg: " << r.message << "\n";
      return r.converged ? 0 : kCheckFailed;
    }

    if (*ca) {
      check_tau(ca_tau);
      const ScalarField f = io::read_field(ca_data);
      ProblemTemplate problem{parse_operator(ca_op, f.grid()), f, ca_beta,
                              ca_flags.options()};
      const double tau =
          ca_tau ? *ca_tau : tau_of(operator_norm(problem.T.adjoint()).value);
      const AlphaRule rule = parse_rule(ca_rule);
      SolveResult res;
      double alpha = 0.0;
      bool ok = true;
      if (rule == AlphaRule::morozov_bisection) {
        MorozovResult m = morozov_bisection(problem, ca_delta, tau);
        alpha = m.alpha;
        res = std::move(m.solve);
      } else {
        FixedPointOptions fo;
        fo.kappa_override = parse_kappa(ca_kappa);
        FixedPointResult fp = fixed_point_alpha(problem, rule, ca_delta, fo);
        for (const auto& w : fp.warnings) std::cerr << "tvreg: warning: " << w << "\n";
        alpha = fp.alpha;
        ok = fp.converged;
        if (!ok) std::cerr << "tvreg: alpha fixed point did not converge\n";
        res = std::move(fp.solve);
      }
      const AdmissibilityReport adm =
          admissibility_check(problem.T, res.phi_alpha, f, ca_delta, tau);
      if (!ca_out.empty()) io::write_field(ca_out, res.phi_alpha);
      if (!ca_report.empty()) io::write_text(ca_report, solve_report_json(res));
      std::cout << "alpha " << io::format_double(alpha) << "\n"
                << "discrepancy " << io::format_double(adm.discrepancy)
                << " bound " << io::format_double(adm.bound) << " admissible "
                << (adm.satisfied ? "true" : "false") << "\n";
      ok = ok && res.converged && adm.satisfied;
      return ok ? 0 : kCheckFailed;
    }

    if (*vf) {
      const CorpusVerification v = verify_corpus(load_corpus(vf_corpus), vf_beta);
      const std::string csv = checks_csv(v.checks);
      if (vf_report.empty() || vf_report == "csv") {
        std::cout << csv;
      } else {
        io::write_text(vf_report, csv);
      }
      std::size_t failed = 0;
      for (const auto& c : v.checks) failed += !c.report.passed;
      std::cerr << v.checks.size() << " checks, " << failed << " failed; "
                << "morrey ratio max " << io::format_double(v.morrey_max)
                << " (" << v.morrey_argmax << ")\n";
      return v.all_passed ? 0 : kCheckFailed;
    }

    if (*sw) {
      check_tau(sw_tau);
      const Grid grid = grid_from(sw_grid, sw_extent);
      SweepExperiment ex{parse_operator(sw_op, grid),
                         make_phantom(sw_phantom, grid).field,
                         {},
                         parse_rule(sw_rule),
                         sw_beta,
                         sw_seed,
                         sw_flags.options(),
                         {},
                         sw_tau};
      ex.fixed_point.kappa_override = parse_kappa(sw_kappa);
      double scale = 1.0;
      if (sw_scale == "relative") {
        scale = lp_norm(ex.T.apply(ex.phi_true), 2.0);
      } else if (sw_scale != "absolute") {
        throw Error("--delta-scale must be relative or absolute");
      }
      for (double d : parse_double_list(sw_deltas, "--deltas")) {
        ex.deltas.push_back(d * scale);
      }
      const SweepResult s = delta_sweep(ex);
      const std::string csv = sweep_csv(s);
      if (sw_report.empty()) {
        std::cout << csv;
      } else {
        io::write_text(sw_report, csv);
      }
      std::cerr << "fitted slope " << io::format_double(s.fitted_slope)
                << ", predicted constant "
                << io::format_double(s.predicted_constant) << "\n";
      bool ok = !s.aborted;
      if (s.aborted) std::cerr << "tvreg: " << s.message << "\n";
      for (bool a : s.admissible) ok = ok && a;
      return ok ? 0 : kCheckFailed;
    }

    if (*rn) {
      const ExperimentConfig cfg = load_config(rn_cfg);
      const fs::path out = rn_out.empty() ? cfg.out_dir : fs::path(rn_out);
      const RunOutcome r = run_experiment(cfg, out);
      for (const auto& f : r.failures) std::cerr << "tvreg: " << f << "\n";
      std::cout << "slope " << io::format_double(r.sweep.fitted_slope)
                << ", " << r.checks.size() << " checks, reports in "
                << out.string() << "\n";
      return r.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "tvreg: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
