#include "tvreg/solver.hpp"

#include <cmath>
#include <limits>

#include "tvreg/calculus.hpp"

namespace tvreg {

void Objective::validate() const {
  require_same_grid(f_delta.grid(), T.range_grid(), "objective data");
  f_delta.require_finite("objective data");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error("objective: alpha must be positive, got " +
                std::to_string(alpha));
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error("objective: beta must be positive, got " +
                std::to_string(beta));
  }
}

std::string to_string(Method m) {
  return m == Method::gradient_descent ? "gradient_descent"
                                       : "lagged_diffusivity";
}

Method parse_method(const std::string& text) {
  if (text == "gradient_descent" || text == "gd") {
    return Method::gradient_descent;
  }
  if (text == "lagged_diffusivity" || text == "lagged") {
    return Method::lagged_diffusivity;
  }
  throw Error("unknown solver method '" + text +
              "' (expected gradient_descent or lagged_diffusivity)");
}

double objective_value(const Objective& obj, const ScalarField& phi) {
  obj.validate();
  const double misfit = lp_norm(obj.T.apply(phi) - obj.f_delta, 2.0);
  return 0.5 * misfit * misfit + obj.alpha * smoothed_tv(phi, obj.beta);
}

namespace {

VectorField scaled(const VectorField& p, const ScalarField& inv) {
  VectorField out(p.grid());
  for (std::size_t a = 0; a < p.dim(); ++a) {
    const auto src = p.component(a);
    auto dst = out.component(a);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] * inv[i];
  }
  return out;
}

ScalarField reciprocal(ScalarField s) {
  for (double& v : s.values()) v = 1.0 / v;
  return s;
}

ScalarField initial_guess(const Objective& obj, const SolveOptions& opts) {
  switch (opts.initial) {
    case InitialGuess::adjoint:
      return obj.T.adjoint_apply(obj.f_delta);
    case InitialGuess::zero:
      return ScalarField(obj.T.domain_grid());
    case InitialGuess::given:
      if (!opts.initial_field) {
        throw Error("solve: initial guess 'given' without a field");
      }
      require_same_grid(opts.initial_field->grid(), obj.T.domain_grid(),
                        "initial guess");
      return *opts.initial_field;
  }
  throw Error("unreachable initial guess");
}

void validate_options(const SolveOptions& opts) {
  if (!(opts.grad_tol > 0.0) || !(opts.cg_tol > 0.0)) {
    throw Error("solve: tolerances must be positive");
  }
}

void finish(const Objective& obj, SolveResult& res) {
  res.discrepancy = lp_norm(obj.T.apply(res.phi_alpha) - obj.f_delta, 2.0);
  res.optimality_residual = optimality_residual(obj, res.phi_alpha);
  res.grad_norm = res.optimality_residual;
}

}  // namespace

ScalarField smoothed_tv_gradient(const ScalarField& phi, double beta) {
  if (!(beta > 0.0)) {
    throw Error("smoothed_tv_gradient: beta must be positive");
  }
  const VectorField g = gradient(phi);
  const ScalarField inv = reciprocal(smoothed_magnitude(g, beta));
  return -1.0 * divergence(scaled(g, inv));
}

ScalarField objective_gradient(const Objective& obj, const ScalarField& phi) {
  ScalarField g = obj.T.adjoint_apply(obj.T.apply(phi) - obj.f_delta);
  g.axpy(obj.alpha, smoothed_tv_gradient(phi, obj.beta));
  return g;
}

double optimality_residual(const Objective& obj, const ScalarField& phi) {
  return lp_norm(objective_gradient(obj, phi), 2.0);
}

double objective_change(const Objective& obj, const ScalarField& phi,
                        const ScalarField& step) {
  const ScalarField r = obj.T.apply(phi) - obj.f_delta;
  const ScalarField Td = obj.T.apply(step);
  const double data = inner(Td, r) + 0.5 * inner(Td, Td);

  const VectorField p = gradient(phi);
  const VectorField q = gradient(step);
  const ScalarField s0 = smoothed_magnitude(p, obj.beta);
  double sum = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    double num = 0.0;
    double m1 = obj.beta;
    for (std::size_t a = 0; a < p.dim(); ++a) {
      const double pa = p.component(a)[i];
      const double qa = q.component(a)[i];
      num += qa * (2.0 * pa + qa);
      m1 += (pa + qa) * (pa + qa);
    }
    sum += num / (s0[i] + std::sqrt(m1));
  }
  return data + obj.alpha * sum * phi.grid().point_weight();
}

CgResult conjugate_gradient(const FieldMap& A, const ScalarField& b,
                            ScalarField x0, double tol, std::size_t max_iter) {
  CgResult res;
  res.x = std::move(x0);
  const double bnorm = lp_norm(b, 2.0);
  if (bnorm == 0.0) {
    res.x = ScalarField(b.grid());
    res.converged = true;
    return res;
  }
  ScalarField r = b - A(res.x);
  double rr = inner(r, r);
  res.relative_residual = std::sqrt(rr) / bnorm;
  if (res.relative_residual <= tol) {
    res.converged = true;
    return res;
  }
  ScalarField p = r;
  for (std::size_t k = 1; k <= max_iter; ++k) {
    const ScalarField Ap = A(p);
    const double pAp = inner(p, Ap);
    if (!(pAp > 0.0)) {
      res.breakdown = true;
      res.iterations = k;
      return res;
    }
    const double step = rr / pAp;
    res.x.axpy(step, p);
    r.axpy(-step, Ap);
    const double rr_new = inner(r, r);
    res.iterations = k;
    res.relative_residual = std::sqrt(rr_new) / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    const double ratio = rr_new / rr;
    rr = rr_new;
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + ratio * p[i];
  }
  return res;
}

FieldMap lagged_operator(const Objective& obj, const ScalarField& phi) {
  const ScalarField D =
      reciprocal(smoothed_magnitude(gradient(phi), obj.beta));
  const LinearOperator T = obj.T;
  const double alpha = obj.alpha;
  return [T, D, alpha](const ScalarField& u) {
    ScalarField out = T.adjoint_apply(T.apply(u));
    out.axpy(-alpha, divergence(scaled(gradient(u), D)));
    return out;
  };
}

SolveResult solve_gradient_descent(const Objective& obj,
                                   const SolveOptions& opts) {
  obj.validate();
  validate_options(opts);
  SolveResult res;
  res.method = Method::gradient_descent;
  res.alpha = obj.alpha;
  res.beta = obj.beta;
  res.cg_tol = opts.cg_tol;

  ScalarField phi = initial_guess(obj, opts);
  double F = objective_value(obj, phi);
  ScalarField g = objective_gradient(obj, phi);
  res.objective_trace.push_back(F);
  double trial = 1.0;

  for (std::size_t k = 0; k < opts.max_outer; ++k) {
    const double gg = inner(g, g);
    if (std::sqrt(gg) <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    double t = trial;
    ScalarField step(phi.grid());
    double change = 0.0;
    bool accepted = false;
    while (t >= kMinStep) {
      step = -t * g;
      change = objective_change(obj, phi, step);
      if (change <= -kArmijoC1 * t * gg) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      res.message = "line search failed: step below 1e-16";
      break;
    }
    ScalarField next = phi + step;
    ScalarField g_next = objective_gradient(obj, next);
    // Barzilai-Borwein trial step for the next line search.
    const ScalarField s = next - phi;
    const ScalarField y = g_next - g;
    const double sy = inner(s, y);
    trial = sy > 0.0 ? inner(s, s) / sy : 2.0 * t;
    phi = std::move(next);
    g = std::move(g_next);
    // Accumulating the accurate change keeps the trace monotone even when
    // the decrease is below the resolution of F itself.
    F += change;
    res.objective_trace.push_back(F);
    res.outer_iterations = k + 1;
  }
  if (!res.converged && res.message.empty()) {
    res.message = "maximum outer iterations reached";
  }
  res.phi_alpha = std::move(phi);
  finish(obj, res);
  return res;
}

SolveResult solve_lagged_diffusivity(const Objective& obj,
                                     const SolveOptions& opts) {
  obj.validate();
  validate_options(opts);
  SolveResult res;
  res.method = Method::lagged_diffusivity;
  res.alpha = obj.alpha;
  res.beta = obj.beta;
  res.cg_tol = opts.cg_tol;

  const Grid& grid = obj.T.domain_grid();
  const ScalarField ones(grid, 1.0);
  if (lp_norm(obj.T.apply(ones), 2.0) <= 1e-12 * lp_norm(ones, 2.0)) {
    res.ill_posed = true;
    res.phi_alpha = initial_guess(obj, opts);
    res.message =
        "ill-posed instance: T annihilates constants, which the penalty "
        "cannot control";
    res.objective_trace.push_back(objective_value(obj, res.phi_alpha));
    finish(obj, res);
    return res;
  }

  const ScalarField rhs = obj.T.adjoint_apply(obj.f_delta);
  ScalarField phi = initial_guess(obj, opts);
  res.objective_trace.push_back(objective_value(obj, phi));

  for (std::size_t k = 0; k < opts.max_outer; ++k) {
    const CgResult cg = conjugate_gradient(lagged_operator(obj, phi), rhs,
                                           phi, opts.cg_tol, opts.cg_max);
    res.inner_iterations += cg.iterations;
    if (!cg.converged) {
      res.message = cg.breakdown
                        ? "conjugate gradient breakdown"
                        : "conjugate gradient stagnated (possible shared "
                          "kernel of T and the penalty)";
      res.phi_alpha = phi;
      finish(obj, res);
      return res;
    }
    const double phi_norm = lp_norm(phi, 2.0);
    const double change = lp_norm(cg.x - phi, 2.0);
    phi = cg.x;
    res.objective_trace.push_back(objective_value(obj, phi));
    res.outer_iterations = k + 1;
    const double rel = phi_norm > 0.0 ? change / phi_norm : change;
    if (rel < opts.grad_tol || optimality_residual(obj, phi) < opts.grad_tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) res.message = "maximum outer iterations reached";
  res.phi_alpha = std::move(phi);
  finish(obj, res);
  return res;
}

SolveResult solve(const Objective& obj, const SolveOptions& opts) {
  return opts.method == Method::gradient_descent
             ? solve_gradient_descent(obj, opts)
             : solve_lagged_diffusivity(obj, opts);
}

LaggedConditionReport lagged_condition_check(const Objective& obj,
                                             const ScalarField& phi,
                                             double tol,
                                             std::size_t max_iter) {
  obj.validate();
  LaggedConditionReport rep;
  const FieldMap P = lagged_operator(obj, phi);
  const Grid& grid = obj.T.domain_grid();

  // Inverse iteration with CG inner solves.
  ScalarField x = random_field(grid, 0x1a66edULL);
  x *= 1.0 / lp_norm(x, 2.0);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    const CgResult cg = conjugate_gradient(P, x, x, 1e-13, 50000);
    rep.iterations = k;
    if (!cg.converged) break;
    ScalarField y = cg.x;
    y *= 1.0 / lp_norm(y, 2.0);
    const ScalarField Py = P(y);
    const double lambda = inner(y, Py);
    rep.lambda_min_estimate = lambda;
    ScalarField r = Py;
    r.axpy(-lambda, y);
    x = std::move(y);
    if (lp_norm(r, 2.0) <= tol * std::abs(lambda)) {
      rep.lambda_converged = true;
      break;
    }
  }
  const OperatorNormEstimate norm = operator_norm(obj.T);
  rep.sigma_TstarT = norm.value * norm.value;
  constexpr double slack = 1e-8;
  rep.satisfied = rep.lambda_min_estimate >= rep.sigma_TstarT * (1.0 - slack) &&
                  rep.sigma_TstarT >= 1.0 - slack;
  return rep;
}

}  // namespace tvreg
