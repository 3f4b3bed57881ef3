#ifndef TVREG_OPERATORS_HPP
#define TVREG_OPERATORS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "tvreg/grid.hpp"
#include "tvreg/io.hpp"

namespace tvreg {

enum class BlurBoundary { periodic, zero };

/// Linear forward map T between two grids, with its adjoint under the
/// quadrature inner products of the domain and range grids. Immutable and
/// cheap to copy.
///
/// Injectivity is assumed by the theory but not checked here; a dense matrix
/// with a nontrivial kernel is accepted.
class LinearOperator {
 public:
  enum class Kind { identity, gaussian_blur, dense_matrix };

  static LinearOperator identity(Grid grid);
  /// Separable Gaussian of standard deviation `sigma` (length units),
  /// truncated at +-4 sigma and renormalized to unit mass per axis.
  static LinearOperator gaussian_blur(Grid grid, double sigma,
                                      BlurBoundary boundary);
  /// `m` maps domain values (m.cols) to range values (m.rows).
  static LinearOperator dense(io::DenseMatrix m, Grid domain, Grid range);

  Kind kind() const;
  const Grid& domain_grid() const;
  const Grid& range_grid() const;
  std::string describe() const;

  ScalarField apply(const ScalarField& u) const;
  ScalarField adjoint_apply(const ScalarField& v) const;
  /// The adjoint as an operator in its own right (range and domain swapped).
  LinearOperator adjoint() const;

  struct Impl;

 private:
  LinearOperator(std::shared_ptr<const Impl> impl, bool transposed)
      : impl_(std::move(impl)), transposed_(transposed) {}
  std::shared_ptr<const Impl> impl_;
  bool transposed_ = false;
};

inline ScalarField apply(const LinearOperator& T, const ScalarField& u) {
  return T.apply(u);
}
inline ScalarField adjoint_apply(const LinearOperator& T,
                                 const ScalarField& v) {
  return T.adjoint_apply(v);
}

using FieldMap = std::function<ScalarField(const ScalarField&)>;

struct EigenEstimate {
  double eigenvalue = 0.0;
  std::size_t iterations = 0;
  /// |A x - lambda x| / |lambda| for the final unit iterate.
  double residual = 0.0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric positive semi-definite map by power
/// iteration from a fixed-seed Gaussian start vector.
EigenEstimate power_iteration(const FieldMap& op, const Grid& grid,
                              double tol, std::size_t max_iter,
                              std::uint64_t seed = 0x0badc0deULL);

struct OperatorNormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// ||T|| = ||T*|| = sqrt(lambda_max(T* T)).
OperatorNormEstimate operator_norm(const LinearOperator& T, double tol = 1e-12,
                                   std::size_t max_iter = 20000);

/// max over trials of |<Tu,v> - <u,T*v>| / (|Tu| |v| + eps) for fixed-seed
/// random u, v.
double adjoint_test(const FieldMap& forward, const FieldMap& backward,
                    const Grid& domain, const Grid& range, int trials,
                    std::uint64_t seed = 0xad701e57ULL);
double adjoint_test(const LinearOperator& T, int trials,
                    std::uint64_t seed = 0xad701e57ULL);

/// Parses `identity`, `blur:sigma=<f>,boundary=periodic|zero` or
/// `matrix:path=<file>` for an operator acting on `grid`. Matrix operators
/// must be square with rows == grid.size().
LinearOperator parse_operator(const std::string& spec, const Grid& grid);

ScalarField random_field(const Grid& grid, std::uint64_t seed);

}  // namespace tvreg

#endif  // TVREG_OPERATORS_HPP
