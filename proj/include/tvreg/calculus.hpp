#ifndef TVREG_CALCULUS_HPP
#define TVREG_CALCULUS_HPP

#include <cstddef>
#include <cstdint>
#include <limits>

#include "tvreg/grid.hpp"

namespace tvreg {

// Discrete calculus on a Grid.
//
// gradient() uses forward differences; on the last slice of an axis the
// corresponding component is zero (replicated boundary). divergence() is the
// exact negative adjoint of gradient() under the quadrature inner product
//   <u, v> = sum_i u_i v_i * w,   w = grid.point_weight(),
// so <grad u, p> + <u, div p> = 0 up to roundoff.

VectorField gradient(const ScalarField& phi);
ScalarField divergence(const VectorField& p);
ScalarField grad_magnitude(const ScalarField& phi);

/// Pointwise sqrt(|p|^2 + beta).
ScalarField smoothed_magnitude(const VectorField& p, double beta);

double inner(const ScalarField& u, const ScalarField& v);
double inner(const VectorField& p, const VectorField& q);

inline constexpr double kInfNorm = std::numeric_limits<double>::infinity();

/// Quadrature p-norm for p in {1, 2, 4, inf}.
double lp_norm(const ScalarField& phi, double p);
/// L2 norm of a vector field, sqrt(sum_a <p_a, p_a>).
double l2_norm(const VectorField& p);

double tv(const ScalarField& phi);
/// Smoothed total variation sum_i w * sqrt(|grad phi|_i^2 + beta).
/// Values of beta >= 1 are accepted; beta <= 0 throws.
double smoothed_tv(const ScalarField& phi, double beta);
double bv_norm(const ScalarField& phi);

struct HolderOptions {
  /// Fields with at most this many points are searched exhaustively.
  std::size_t exhaustive_threshold = 4096;
  /// Above the threshold: every pair whose index offset is at most this
  /// along each axis is visited.
  std::size_t neighbor_radius = 3;
  std::size_t random_pairs = 200000;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct HolderEstimate {
  double value = 0.0;
  /// True when the value comes from sampling and only bounds the sup below.
  bool lower_bound = false;
  std::size_t first = 0;
  std::size_t second = 0;
};

/// sup |phi(x) - phi(y)| / |x - y|^gamma over distinct grid points.
HolderEstimate holder_coefficient(const ScalarField& phi, double gamma,
                                  const HolderOptions& options = {});

double holder_norm(const ScalarField& phi, double gamma,
                   const HolderOptions& options = {});

}  // namespace tvreg

#endif  // TVREG_CALCULUS_HPP
