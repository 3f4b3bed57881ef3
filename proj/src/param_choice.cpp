#include "tvreg/param_choice.hpp"

#include <cmath>
#include <limits>

#include "tvreg/io.hpp"

namespace tvreg {

double K_of(const ScalarField& phi, double beta) {
  if (!(beta > 0.0)) throw Error("K_of: beta must be positive");
  const VectorField g = gradient(phi);
  const Grid& grid = phi.grid();
  double U = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.has_full_stencil(i)) continue;
    double m = 0.0;
    for (std::size_t a = 0; a < g.dim(); ++a) {
      const double c = g.component(a)[i];
      m += c * c;
    }
    U = std::min(U, m);
  }
  return 1.0 / std::sqrt(U + beta);
}

OperatorNormEstimate lipschitz_L(const Grid& grid, double tol,
                                 std::size_t max_iter) {
  const EigenEstimate e = power_iteration(
      [](const ScalarField& u) { return -1.0 * divergence(gradient(u)); },
      grid, tol, max_iter, 0x11b5c417ULL);
  return {std::sqrt(std::max(e.eigenvalue, 0.0)), e.iterations, e.residual,
          e.converged};
}

void RuleInputs::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(std::string("rule inputs: ") + name +
                  " must be positive and finite, got " + std::to_string(v));
    }
  };
  positive(delta, "delta");
  positive(kappa, "kappa");
  positive(volume, "volume");
  positive(K_value, "K");
}

std::vector<std::string> RuleInputs::warnings() const {
  std::vector<std::string> out;
  if (delta >= 1.0) {
    out.push_back("delta >= 1: the linear-in-delta rule is stated for small "
                  "delta in (0, 1)");
  }
  return out;
}

std::string to_string(AlphaRule rule) {
  switch (rule) {
    case AlphaRule::rule1_delta_sq:
      return "rule1";
    case AlphaRule::rule2_delta_sq_lipschitz:
      return "rule2";
    case AlphaRule::rule3_delta:
      return "rule3";
    case AlphaRule::morozov_bisection:
      return "morozov";
  }
  return "unknown";
}

AlphaRule parse_rule(const std::string& text) {
  if (text == "rule1" || text == "rule1_delta_sq") {
    return AlphaRule::rule1_delta_sq;
  }
  if (text == "rule2" || text == "rule2_delta_sq_lipschitz") {
    return AlphaRule::rule2_delta_sq_lipschitz;
  }
  if (text == "rule3" || text == "rule3_delta") return AlphaRule::rule3_delta;
  if (text == "morozov" || text == "morozov_bisection") {
    return AlphaRule::morozov_bisection;
  }
  throw Error("unknown alpha rule '" + text +
              "' (expected rule1, rule2, rule3 or morozov)");
}

namespace {

// K^-1 / (2 kappa^2 |Omega|^2), the factor shared by all three rules.
double rule_base(const RuleInputs& in) {
  in.validate();
  return 1.0 / (in.K_value * 2.0 * in.kappa * in.kappa * in.volume *
                in.volume);
}

void require_L(const RuleInputs& in) {
  if (!(in.L_value > 0.0) || !std::isfinite(in.L_value)) {
    throw Error("rule inputs: L must be positive and finite, got " +
                std::to_string(in.L_value));
  }
}

}  // namespace

double alpha_rule1(const RuleInputs& in) {
  return in.delta * in.delta * rule_base(in);
}

double alpha_rule2(const RuleInputs& in) {
  require_L(in);
  return alpha_rule1(in) / in.L_value;
}

double alpha_rule3(const RuleInputs& in) {
  require_L(in);
  return in.delta * rule_base(in) / in.L_value;
}

double rule_bound(AlphaRule rule, const RuleInputs& in) {
  switch (rule) {
    case AlphaRule::rule1_delta_sq:
      return alpha_rule1(in);
    case AlphaRule::rule2_delta_sq_lipschitz:
      return alpha_rule2(in);
    case AlphaRule::rule3_delta:
      return alpha_rule3(in);
    case AlphaRule::morozov_bisection:
      break;
  }
  throw Error("rule_bound: morozov has no closed-form bound");
}

double tau_of(double T_adjoint_norm) {
  if (!(T_adjoint_norm >= 0.0)) {
    throw Error("tau_of: operator norm must be non-negative");
  }
  return std::sqrt(1.5 + T_adjoint_norm);
}

AdmissibilityReport admissibility_check(const LinearOperator& T,
                                        const ScalarField& phi_alpha,
                                        const ScalarField& f_delta,
                                        double delta, double tau) {
  if (!(tau >= 1.0)) {
    throw Error("admissibility: tau must be >= 1, got " + std::to_string(tau));
  }
  if (!(delta >= 0.0)) throw Error("admissibility: delta must be >= 0");
  AdmissibilityReport rep;
  rep.tau = tau;
  rep.discrepancy = lp_norm(T.apply(phi_alpha) - f_delta, 2.0);
  rep.bound = tau * delta;
  rep.satisfied = rep.discrepancy <= rep.bound;
  rep.margin = rep.bound - rep.discrepancy;
  return rep;
}

FixedPointResult fixed_point_alpha(const ProblemTemplate& problem,
                                   AlphaRule rule, double delta,
                                   const FixedPointOptions& opts) {
  if (rule == AlphaRule::morozov_bisection) {
    throw Error("fixed_point_alpha: rule must be rule1, rule2 or rule3");
  }
  if (!(opts.omega > 0.0 && opts.omega <= 1.0)) {
    throw Error("fixed_point_alpha: omega must lie in (0, 1]");
  }
  const Grid& grid = problem.T.domain_grid();
  FixedPointResult out;

  RuleInputs in;
  in.delta = delta;
  in.volume = grid.volume();
  in.T_adjoint_norm = operator_norm(problem.T).value;
  in.L_value = rule == AlphaRule::rule1_delta_sq ? 1.0 : lipschitz_L(grid).value;
  out.warnings = in.warnings();

  auto kappa_of = [&](const ScalarField& phi) {
    return opts.kappa_override
               ? *opts.kappa_override
               : holder_coefficient(phi, 1.0, opts.holder).value;
  };

  // Worst case U = 0 for the starting bound.
  in.K_value = 1.0 / std::sqrt(problem.beta);
  in.kappa = kappa_of(problem.T.adjoint_apply(problem.f_delta));
  double alpha = rule_bound(rule, in);

  SolveOptions sopts = problem.solve;
  for (std::size_t k = 1; k <= opts.max_iter; ++k) {
    out.solve = solve(problem.with_alpha(alpha), sopts);
    const ScalarField& phi = out.solve.phi_alpha;
    in.K_value = K_of(phi, problem.beta);
    in.kappa = kappa_of(phi);
    const double bound = rule_bound(rule, in);
    out.alpha = alpha;
    out.alpha_trace.push_back(alpha);
    out.bound_trace.push_back(bound);
    out.iterations = k;
    out.inputs = in;
    out.self_consistency = std::abs(bound - alpha) / alpha;
    if (out.self_consistency < opts.tol) {
      out.converged = true;
      break;
    }
    alpha = (1.0 - opts.omega) * alpha + opts.omega * bound;
    sopts.initial = InitialGuess::given;
    sopts.initial_field = phi;
  }
  return out;
}

MorozovResult morozov_bisection(const ProblemTemplate& problem, double delta,
                                double tau, const MorozovOptions& opts) {
  if (!(tau >= 1.0)) {
    throw Error("morozov: tau must be >= 1, got " + std::to_string(tau));
  }
  if (!(delta > 0.0)) throw Error("morozov: delta must be positive");
  const double upper = tau * delta;
  auto run = [&](double alpha) {
    return solve(problem.with_alpha(alpha), problem.solve);
  };

  MorozovResult best;
  bool have_admissible = false;
  auto record = [&](double alpha, SolveResult&& res) {
    if (res.discrepancy <= upper && (!have_admissible || alpha > best.alpha)) {
      best.alpha = alpha;
      best.in_band = res.discrepancy >= delta;
      best.solve = std::move(res);
      have_admissible = true;
    }
  };

  // Upward scan for the bracket [lo, hi] with d(lo) <= tau*delta < d(hi).
  double lo = opts.alpha_min;
  SolveResult r_lo = run(lo);
  if (r_lo.discrepancy > upper) {
    throw DiscrepancyNotBracketed(
        "discrepancy not bracketed: misfit exceeds tau*delta already at "
        "alpha=" + io::format_double(lo));
  }
  const bool lo_in_band = r_lo.discrepancy >= delta;
  record(lo, std::move(r_lo));
  double hi = 0.0;
  bool bracketed = false;
  if (!lo_in_band) {
    for (double a = lo * 10.0; a <= opts.alpha_max * (1.0 + 1e-12);
         a *= 10.0) {
      SolveResult r = run(a);
      const double d = r.discrepancy;
      if (d > upper) {
        hi = a;
        bracketed = true;
        break;
      }
      const bool in_band = d >= delta;
      record(a, std::move(r));
      lo = a;
      if (in_band) return best;
    }
    if (!bracketed) {
      throw DegenerateDiscrepancy(
          "degenerate instance: discrepancy stays below tau*delta up to "
          "alpha=" + io::format_double(opts.alpha_max) +
          " (alpha unbounded above)");
    }
  } else {
    return best;
  }

  for (std::size_t k = 1; k <= opts.max_iter; ++k) {
    best.iterations = k;
    const double mid = std::sqrt(lo * hi);
    SolveResult r = run(mid);
    const double d = r.discrepancy;
    if (d > upper) {
      hi = mid;
    } else {
      record(mid, std::move(r));
      lo = mid;
      if (d >= delta) break;
    }
  }
  return best;
}

}  // namespace tvreg
