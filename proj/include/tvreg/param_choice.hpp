#ifndef TVREG_PARAM_CHOICE_HPP
#define TVREG_PARAM_CHOICE_HPP

#include <optional>
#include <string>
#include <vector>

#include "tvreg/calculus.hpp"
#include "tvreg/operators.hpp"
#include "tvreg/solver.hpp"

namespace tvreg {

/// K(phi) = (U + beta)^(-1/2), U = min |grad phi|^2 over points with a full
/// forward-difference stencil (the last slice of each axis is excluded).
double K_of(const ScalarField& phi, double beta);

/// Norm of the discrete gradient operator on `grid`, a Lipschitz constant
/// |grad(u - v)| <= L |u - v| valid for every pair of fields on the grid.
OperatorNormEstimate lipschitz_L(const Grid& grid, double tol = 1e-7,
                                 std::size_t max_iter = 200000);

struct RuleInputs {
  double delta = 0.0;
  double kappa = 0.0;
  double volume = 0.0;
  double K_value = 0.0;
  double L_value = 0.0;
  double T_adjoint_norm = 0.0;

  /// Throws unless delta, kappa, volume, K_value are positive and finite.
  void validate() const;
  /// Non-fatal remarks, e.g. delta >= 1 for the linear-in-delta rule.
  std::vector<std::string> warnings() const;
};

enum class AlphaRule {
  rule1_delta_sq,
  rule2_delta_sq_lipschitz,
  rule3_delta,
  morozov_bisection
};

std::string to_string(AlphaRule rule);
/// Accepts rule1 | rule2 | rule3 | morozov and the long names.
AlphaRule parse_rule(const std::string& text);

/// delta^2 / (K * 2 kappa^2 |Omega|^2)
double alpha_rule1(const RuleInputs& in);
/// alpha_rule1 / L
double alpha_rule2(const RuleInputs& in);
/// delta / (K * 2 kappa^2 |Omega|^2 L)
double alpha_rule3(const RuleInputs& in);
/// Dispatches to the three explicit rules; throws for morozov_bisection.
double rule_bound(AlphaRule rule, const RuleInputs& in);

/// tau = sqrt(3/2 + ||T*||), always >= 1.
double tau_of(double T_adjoint_norm);

struct AdmissibilityReport {
  double tau = 1.0;
  double discrepancy = 0.0;
  double bound = 0.0;  // tau * delta
  bool satisfied = false;
  double margin = 0.0;  // bound - discrepancy
};

/// Throws if tau < 1 or delta < 0.
AdmissibilityReport admissibility_check(const LinearOperator& T,
                                        const ScalarField& phi_alpha,
                                        const ScalarField& f_delta,
                                        double delta, double tau);

/// Everything of an Objective except alpha.
struct ProblemTemplate {
  LinearOperator T;
  ScalarField f_delta;
  double beta = 0.0;
  SolveOptions solve;

  Objective with_alpha(double alpha) const { return {T, f_delta, alpha, beta}; }
};

struct FixedPointOptions {
  /// Use this Lipschitz constant instead of the gamma=1 Holder coefficient
  /// of the current iterate.
  std::optional<double> kappa_override;
  double omega = 0.5;
  double tol = 1e-3;
  std::size_t max_iter = 20;
  HolderOptions holder;
};

struct FixedPointResult {
  double alpha = 0.0;
  SolveResult solve;
  std::vector<double> alpha_trace;
  std::vector<double> bound_trace;
  /// |alpha - bound(phi_alpha)| / alpha for the returned pair.
  double self_consistency = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  RuleInputs inputs;  // evaluated at the returned phi_alpha
  std::vector<std::string> warnings;
};

/// Resolves the dependence of the explicit rules on K(phi_alpha) and kappa
/// by a damped fixed-point iteration alpha <- (1-omega) alpha + omega bound.
/// The iteration stops once |bound(phi_k) - alpha_k| / alpha_k < tol and
/// returns (alpha_k, phi_k).
FixedPointResult fixed_point_alpha(const ProblemTemplate& problem,
                                   AlphaRule rule, double delta,
                                   const FixedPointOptions& opts = {});

class DiscrepancyNotBracketed : public Error {
 public:
  using Error::Error;
};

/// The discrepancy stays below tau*delta for every alpha tried: the noise
/// level exceeds the misfit of the alpha -> infinity limit.
class DegenerateDiscrepancy : public Error {
 public:
  using Error::Error;
};

struct MorozovOptions {
  double alpha_min = 1e-12;
  double alpha_max = 1e4;
  std::size_t max_iter = 50;
};

struct MorozovResult {
  double alpha = 0.0;
  SolveResult solve;
  /// Bisection steps after the bracket was found.
  std::size_t iterations = 0;
  /// Discrepancy landed in [delta, tau*delta].
  bool in_band = false;
};

/// Bisection on log(alpha) for a discrepancy in [delta, tau*delta]. The
/// bracket is found by scanning alpha_min * 10^k upward; the largest
/// admissible alpha seen is returned.
MorozovResult morozov_bisection(const ProblemTemplate& problem, double delta,
                                double tau, const MorozovOptions& opts = {});

}  // namespace tvreg

#endif  // TVREG_PARAM_CHOICE_HPP
