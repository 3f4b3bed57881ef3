#ifndef TVREG_ANALYSIS_HPP
#define TVREG_ANALYSIS_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tvreg/calculus.hpp"
#include "tvreg/operators.hpp"
#include "tvreg/param_choice.hpp"
#include "tvreg/solver.hpp"

namespace tvreg {

enum class Functional { smoothed_tv, half_sq_l2 };

struct BregmanReport {
  double value = 0.0;
  double lhs_pair_norm = 0.0;       // |u - v|_2
  double grad_pair_seminorm = 0.0;  // |grad(u - v)|_2
  /// Curvature lower bound c: beta / (P^2 + beta)^(3/2) with P the largest
  /// pointwise gradient of u and v for smoothed TV, 1 for the half square.
  double modulus_bound = 0.0;
  /// |Phi(u)| + |Phi(v)|, the reference for roundoff tolerances.
  double scale = 0.0;
};

/// D(u, v) = Phi(u) - Phi(v) - <grad Phi(v), u - v>. For smoothed TV the
/// linear term is evaluated as <grad v / s_v, grad(u - v)>, which equals the
/// divergence form by summation by parts and vanishes when u - v is constant.
BregmanReport bregman(Functional functional, double beta, const ScalarField& u,
                      const ScalarField& v);

/// c = beta / (p_max^2 + beta)^(3/2).
double strong_convexity_modulus(double beta, double p_max);

struct ConvexityProbe {
  /// inf D / |u - v|_2^q over pairs with u != v.
  double c_star_l2 = 0.0;
  /// inf D / |grad(u - v)|_2^q over pairs with nonzero seminorm.
  double c_star_grad_seminorm = 0.0;
  std::size_t argmin_l2 = 0;
  std::size_t argmin_grad = 0;
  std::size_t pairs_l2 = 0;
  std::size_t pairs_grad = 0;
};

using FieldPair = std::pair<ScalarField, ScalarField>;

ConvexityProbe q_convexity_probe(double beta,
                                 const std::vector<FieldPair>& pairs,
                                 double q = 2.0);

struct TheoremCheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool passed = false;
  double slack = 0.0;  // rhs - lhs
  std::string digest;  // of the input field(s)
  std::string note;
};

/// Relative roundoff allowance of every check: lhs <= rhs + tol * scale.
inline constexpr double kCheckTolerance = 1e-12;

/// [phi]_gamma <= r^(1-gamma) / |Omega| * TV(phi), gamma = 1/4 in 3D and
/// gamma = 1/2 in 2D (the latter marked "extended" in the note).
TheoremCheckReport check_holder_vs_tv(const ScalarField& phi,
                                      const HolderOptions& holder = {});

/// TV(phi) <= kappa |Omega| (1 + 4 h_max / extent_min).
TheoremCheckReport check_grad_l1(const ScalarField& phi,
                                 const HolderOptions& holder = {});

/// int |grad phi|^2 <= kappa^2 |Omega|^2.
TheoremCheckReport check_grad_l2_sq(const ScalarField& phi,
                                    const HolderOptions& holder = {});

/// |phi|_gamma >= |phi|_inf >= |phi|_L1 / |Omega|. Reported as
/// lhs = |phi|_L1 / |Omega|, rhs = |phi|_gamma, slack = the smaller link.
TheoremCheckReport check_l1_embedding(const ScalarField& phi, double gamma,
                                      const HolderOptions& holder = {});

/// J(u) - J(v) <= 2 kappa^2 |Omega|^2 K(u) |grad(u - v)|_2 with kappa the
/// larger Lipschitz coefficient of u and v.
TheoremCheckReport check_successive_tv(const ScalarField& u,
                                       const ScalarField& v, double beta,
                                       const HolderOptions& holder = {});

/// As check_successive_tv with |grad(u - v)|_2 replaced by L |u - v|_2.
/// `L` defaults to lipschitz_L of the grid.
TheoremCheckReport check_lipschitz_successive_tv(
    const ScalarField& u, const ScalarField& v, double beta,
    std::optional<double> L = std::nullopt, const HolderOptions& holder = {});

/// [phi]_(1 - d/4) / |grad phi|_L4; nullopt for constant fields.
std::optional<double> morrey_ratio(const ScalarField& phi,
                                   const HolderOptions& holder = {});

struct SweepExperiment {
  LinearOperator T;
  ScalarField phi_true;
  std::vector<double> deltas;  // absolute noise levels, strictly decreasing
  AlphaRule rule = AlphaRule::rule3_delta;
  double beta = 0.01;
  std::uint64_t seed = 1;
  SolveOptions solve;
  FixedPointOptions fixed_point;
  /// Replaces tau_of(||T*||) when set; must be >= 1.
  std::optional<double> tau_override;
};

struct SweepResult {
  std::vector<double> deltas;
  std::vector<double> errors;  // |phi_alpha - phi_true|_2
  std::vector<double> discrepancies;
  std::vector<double> alphas;
  std::vector<double> taus;
  std::vector<bool> admissible;  // discrepancy <= tau * delta
  std::vector<std::string> solution_digests;
  std::vector<ScalarField> solutions;
  double fitted_slope = 0.0;
  double predicted_constant = 0.0;  // 1/2 + ||T*||
  double T_adjoint_norm = 0.0;
  bool errors_monotone = false;  // error decreases with delta
  /// A solve or the alpha fixed point failed to converge; results stop there.
  bool aborted = false;
  std::string message;
};

/// Data f = T phi_true + noise with |noise|_2 = delta exactly; the noise
/// direction comes from `seed` and is the same for every delta.
SweepResult delta_sweep(const SweepExperiment& ex);

/// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y);

}  // namespace tvreg

#endif  // TVREG_ANALYSIS_HPP
