#include "tvreg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvreg/io.hpp"
#include "tvreg/phantom.hpp"

namespace tvreg {

namespace {

double max_pointwise(const ScalarField& f) {
  double m = 0.0;
  for (double x : f.values()) m = std::max(m, std::abs(x));
  return m;
}

TheoremCheckReport make_report(std::string name, double lhs, double rhs,
                               std::string digest, std::string note = {}) {
  TheoremCheckReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
  r.passed = lhs <= rhs + kCheckTolerance * scale;
  r.digest = std::move(digest);
  r.note = std::move(note);
  return r;
}

std::string pair_digest(const ScalarField& u, const ScalarField& v) {
  return io::digest(u) + "+" + io::digest(v);
}

double kappa_of(const ScalarField& phi, const HolderOptions& holder) {
  return holder_coefficient(phi, 1.0, holder).value;
}

}  // namespace

BregmanReport bregman(Functional functional, double beta, const ScalarField& u,
                      const ScalarField& v) {
  require_same_grid(u.grid(), v.grid(), "bregman");
  BregmanReport rep;
  const ScalarField diff = u - v;
  const VectorField gdiff = gradient(diff);
  rep.lhs_pair_norm = lp_norm(diff, 2.0);
  rep.grad_pair_seminorm = l2_norm(gdiff);

  if (functional == Functional::half_sq_l2) {
    const double fu = 0.5 * inner(u, u);
    const double fv = 0.5 * inner(v, v);
    rep.value = fu - fv - inner(v, diff);
    rep.modulus_bound = 1.0;
    rep.scale = std::abs(fu) + std::abs(fv);
    return rep;
  }

  const VectorField gv = gradient(v);
  const ScalarField sv = smoothed_magnitude(gv, beta);
  const double Ju = smoothed_tv(u, beta);
  const double Jv = smoothed_tv(v, beta);
  const double w = u.grid().point_weight();
  double linear = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double acc = 0.0;
    for (std::size_t a = 0; a < gv.dim(); ++a) {
      acc += gv.component(a)[i] * gdiff.component(a)[i];
    }
    linear += acc / sv[i];
  }
  rep.value = Ju - Jv - w * linear;
  const double P = std::max(max_pointwise(grad_magnitude(u)),
                            max_pointwise(grad_magnitude(v)));
  rep.modulus_bound = strong_convexity_modulus(beta, P);
  rep.scale = std::abs(Ju) + std::abs(Jv);
  return rep;
}

double strong_convexity_modulus(double beta, double p_max) {
  if (!(beta > 0.0)) throw Error("strong_convexity_modulus: beta must be > 0");
  if (!(p_max >= 0.0)) {
    throw Error("strong_convexity_modulus: p_max must be >= 0");
  }
  return beta / std::pow(p_max * p_max + beta, 1.5);
}

ConvexityProbe q_convexity_probe(double beta,
                                 const std::vector<FieldPair>& pairs,
                                 double q) {
  if (pairs.empty()) throw Error("q_convexity_probe: no pairs given");
  ConvexityProbe out;
  out.c_star_l2 = std::numeric_limits<double>::infinity();
  out.c_star_grad_seminorm = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const BregmanReport b =
        bregman(Functional::smoothed_tv, beta, pairs[k].first, pairs[k].second);
    if (b.lhs_pair_norm > 0.0) {
      const double c = b.value / std::pow(b.lhs_pair_norm, q);
      if (c < out.c_star_l2) {
        out.c_star_l2 = c;
        out.argmin_l2 = k;
      }
      ++out.pairs_l2;
    }
    if (b.grad_pair_seminorm > 0.0) {
      const double c = b.value / std::pow(b.grad_pair_seminorm, q);
      if (c < out.c_star_grad_seminorm) {
        out.c_star_grad_seminorm = c;
        out.argmin_grad = k;
      }
      ++out.pairs_grad;
    }
  }
  return out;
}

TheoremCheckReport check_holder_vs_tv(const ScalarField& phi,
                                      const HolderOptions& holder) {
  const Grid& g = phi.grid();
  double gamma = 0.0;
  std::string note;
  if (g.dim() == 3) {
    gamma = 0.25;
  } else if (g.dim() == 2) {
    gamma = 0.5;
    note = "extended: gamma=1/2 in 2D";
  } else {
    throw Error("check_holder_vs_tv: needs a 2D or 3D grid");
  }
  const double lhs = holder_coefficient(phi, gamma, holder).value;
  const double rhs = std::pow(g.diameter(), 1.0 - gamma) / g.volume() * tv(phi);
  return make_report("holder_vs_tv", lhs, rhs, io::digest(phi),
                     std::move(note));
}

TheoremCheckReport check_grad_l1(const ScalarField& phi,
                                 const HolderOptions& holder) {
  const Grid& g = phi.grid();
  const double factor = 1.0 + 4.0 * g.max_spacing() / g.min_extent();
  const double rhs = kappa_of(phi, holder) * g.volume() * factor;
  return make_report("grad_l1", tv(phi), rhs, io::digest(phi));
}

TheoremCheckReport check_grad_l2_sq(const ScalarField& phi,
                                    const HolderOptions& holder) {
  const Grid& g = phi.grid();
  const double lhs = l2_norm(gradient(phi));
  const double kappa = kappa_of(phi, holder);
  return make_report("grad_l2_sq", lhs * lhs,
                     kappa * kappa * g.volume() * g.volume(), io::digest(phi));
}

TheoremCheckReport check_l1_embedding(const ScalarField& phi, double gamma,
                                      const HolderOptions& holder) {
  const double mean_abs = lp_norm(phi, 1.0) / phi.grid().volume();
  const double sup = lp_norm(phi, kInfNorm);
  const double hnorm = holder_norm(phi, gamma, holder);
  TheoremCheckReport r = make_report("l1_embedding", mean_abs, hnorm,
                                     io::digest(phi), "chain via sup norm");
  const double s1 = sup - mean_abs;
  const double s2 = hnorm - sup;
  const double scale = std::max({1.0, hnorm});
  r.slack = std::min(s1, s2);
  r.passed = s1 >= -kCheckTolerance * scale && s2 >= -kCheckTolerance * scale;
  return r;
}

TheoremCheckReport check_successive_tv(const ScalarField& u,
                                       const ScalarField& v, double beta,
                                       const HolderOptions& holder) {
  require_same_grid(u.grid(), v.grid(), "check_successive_tv");
  const double vol = u.grid().volume();
  const double kappa = std::max(kappa_of(u, holder), kappa_of(v, holder));
  const double lhs = smoothed_tv(u, beta) - smoothed_tv(v, beta);
  const double rhs = 2.0 * kappa * kappa * vol * vol * K_of(u, beta) *
                     l2_norm(gradient(u - v));
  return make_report("successive_tv", lhs, rhs, pair_digest(u, v));
}

TheoremCheckReport check_lipschitz_successive_tv(
    const ScalarField& u, const ScalarField& v, double beta,
    std::optional<double> L, const HolderOptions& holder) {
  require_same_grid(u.grid(), v.grid(), "check_lipschitz_successive_tv");
  const double Lv = L ? *L : lipschitz_L(u.grid()).value;
  const double vol = u.grid().volume();
  const double kappa = std::max(kappa_of(u, holder), kappa_of(v, holder));
  const double lhs = smoothed_tv(u, beta) - smoothed_tv(v, beta);
  const double rhs = 2.0 * kappa * kappa * vol * vol * K_of(u, beta) * Lv *
                     lp_norm(u - v, 2.0);
  return make_report("lipschitz_successive_tv", lhs, rhs, pair_digest(u, v));
}

std::optional<double> morrey_ratio(const ScalarField& phi,
                                   const HolderOptions& holder) {
  const double d = static_cast<double>(phi.grid().dim());
  const double denom = lp_norm(grad_magnitude(phi), 4.0);
  if (denom == 0.0) return std::nullopt;
  return holder_coefficient(phi, 1.0 - d / 4.0, holder).value / denom;
}

double log_log_slope(const std::vector<double>& x,
                     const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error("log_log_slope: need at least two matching samples");
  }
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw Error("log_log_slope: samples must be positive");
    }
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error("log_log_slope: x values are all equal");
  return sxy / sxx;
}

SweepResult delta_sweep(const SweepExperiment& ex) {
  if (ex.deltas.empty()) throw Error("delta_sweep: no noise levels given");
  for (std::size_t i = 0; i < ex.deltas.size(); ++i) {
    if (!(ex.deltas[i] > 0.0)) throw Error("delta_sweep: deltas must be > 0");
    if (i > 0 && !(ex.deltas[i] < ex.deltas[i - 1])) {
      throw Error("delta_sweep: deltas must be strictly decreasing");
    }
  }
  if (ex.tau_override && !(*ex.tau_override >= 1.0)) {
    throw Error("delta_sweep: tau override must be >= 1, got " +
                io::format_double(*ex.tau_override));
  }
  SweepResult out;
  out.T_adjoint_norm = operator_norm(ex.T.adjoint()).value;
  out.predicted_constant = 0.5 + out.T_adjoint_norm;
  const double tau =
      ex.tau_override ? *ex.tau_override : tau_of(out.T_adjoint_norm);
  const ScalarField f_true = ex.T.apply(ex.phi_true);

  for (double delta : ex.deltas) {
    ProblemTemplate problem{ex.T, add_noise(f_true, delta, ex.seed), ex.beta,
                            ex.solve};
    SolveResult sol;
    double alpha = 0.0;
    if (ex.rule == AlphaRule::morozov_bisection) {
      MorozovResult m = morozov_bisection(problem, delta, tau);
      alpha = m.alpha;
      sol = std::move(m.solve);
    } else {
      FixedPointResult fp =
          fixed_point_alpha(problem, ex.rule, delta, ex.fixed_point);
      alpha = fp.alpha;
      sol = std::move(fp.solve);
      if (!fp.converged) {
        out.aborted = true;
        out.message = "alpha fixed point did not converge at delta=" +
                      io::format_double(delta);
      }
    }
    if (!sol.converged && !out.aborted) {
      out.aborted = true;
      out.message = "solve did not converge at delta=" +
                    io::format_double(delta) + ": " + sol.message;
    }
    out.deltas.push_back(delta);
    out.alphas.push_back(alpha);
    out.taus.push_back(tau);
    out.discrepancies.push_back(sol.discrepancy);
    out.admissible.push_back(sol.discrepancy <= tau * delta);
    out.errors.push_back(lp_norm(sol.phi_alpha - ex.phi_true, 2.0));
    out.solution_digests.push_back(io::digest(sol.phi_alpha));
    out.solutions.push_back(std::move(sol.phi_alpha));
    if (out.aborted) break;
  }

  out.errors_monotone = true;
  for (std::size_t i = 1; i < out.errors.size(); ++i) {
    if (!(out.errors[i] < out.errors[i - 1])) out.errors_monotone = false;
  }
  if (out.deltas.size() >= 2) {
    out.fitted_slope = log_log_slope(out.deltas, out.errors);
  }
  return out;
}

}  // namespace tvreg
