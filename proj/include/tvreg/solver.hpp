#ifndef TVREG_SOLVER_HPP
#define TVREG_SOLVER_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tvreg/grid.hpp"
#include "tvreg/operators.hpp"

namespace tvreg {

/// F(phi) = 1/2 |T phi - f_delta|^2 + alpha * J_beta(phi).
struct Objective {
  LinearOperator T;
  ScalarField f_delta;
  double alpha = 0.0;
  double beta = 0.0;

  /// Throws on grid mismatch or non-positive alpha / beta.
  void validate() const;
};

enum class Method { gradient_descent, lagged_diffusivity };

std::string to_string(Method m);
Method parse_method(const std::string& text);

enum class InitialGuess { adjoint, zero, given };

struct SolveOptions {
  Method method = Method::lagged_diffusivity;
  /// Stop when |grad F| <= grad_tol. Lagged diffusivity also stops when the
  /// relative update |phi_{k+1} - phi_k| / |phi_k| drops below it.
  double grad_tol = 1e-8;
  std::size_t max_outer = 2000;
  double cg_tol = 1e-12;
  std::size_t cg_max = 20000;
  InitialGuess initial = InitialGuess::adjoint;
  std::optional<ScalarField> initial_field;
};

inline constexpr double kArmijoC1 = 1e-4;
inline constexpr double kMinStep = 1e-16;

struct SolveResult {
  Method method = Method::lagged_diffusivity;
  double alpha = 0.0;
  double beta = 0.0;
  ScalarField phi_alpha;
  std::vector<double> objective_trace;
  double grad_norm = 0.0;
  double discrepancy = 0.0;
  double optimality_residual = 0.0;
  std::size_t outer_iterations = 0;
  std::size_t inner_iterations = 0;
  bool converged = false;
  /// The data term and the penalty share a kernel (T kills constants).
  bool ill_posed = false;
  double armijo_c1 = kArmijoC1;
  double cg_tol = 0.0;
  std::string message;
};

double objective_value(const Objective& obj, const ScalarField& phi);

/// grad J_beta(phi) = -div( grad phi / sqrt(|grad phi|^2 + beta) ), the
/// gradient with respect to the quadrature inner product.
ScalarField smoothed_tv_gradient(const ScalarField& phi, double beta);

/// T*(T phi - f_delta) + alpha grad J_beta(phi).
ScalarField objective_gradient(const Objective& obj, const ScalarField& phi);

/// |T*(f_delta - T phi) - alpha grad J_beta(phi)|_2; zero at a minimizer.
double optimality_residual(const Objective& obj, const ScalarField& phi);

/// F(phi + step) - F(phi), evaluated term by term so that the difference
/// keeps its relative accuracy when it is far below the roundoff of F.
double objective_change(const Objective& obj, const ScalarField& phi,
                        const ScalarField& step);

SolveResult solve_gradient_descent(const Objective& obj,
                                   const SolveOptions& opts);
SolveResult solve_lagged_diffusivity(const Objective& obj,
                                     const SolveOptions& opts);
SolveResult solve(const Objective& obj, const SolveOptions& opts);

struct CgResult {
  ScalarField x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool breakdown = false;
};

/// Conjugate gradient for a map that is self-adjoint and positive definite
/// under the quadrature inner product.
CgResult conjugate_gradient(const FieldMap& A, const ScalarField& b,
                            ScalarField x0, double tol, std::size_t max_iter);

/// The lagged operator P(phi) u = T*T u - alpha div(D grad u) with
/// D = 1 / sqrt(|grad phi|^2 + beta).
FieldMap lagged_operator(const Objective& obj, const ScalarField& phi);

struct LaggedConditionReport {
  double lambda_min_estimate = 0.0;
  double sigma_TstarT = 0.0;  // ||T*T|| = ||T||^2
  bool lambda_converged = false;
  std::size_t iterations = 0;
  /// lambda_min(P) >= sigma(T*T) >= 1, each up to relative 1e-8.
  bool satisfied = false;
};

LaggedConditionReport lagged_condition_check(const Objective& obj,
                                             const ScalarField& phi,
                                             double tol = 1e-8,
                                             std::size_t max_iter = 500);

}  // namespace tvreg

#endif  // TVREG_SOLVER_HPP
