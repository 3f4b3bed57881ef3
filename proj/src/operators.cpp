#include "tvreg/operators.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "tvreg/calculus.hpp"
#include "tvreg/random.hpp"
#include "tvreg/spec_string.hpp"

namespace tvreg {

struct LinearOperator::Impl {
  Kind kind = Kind::identity;
  Grid domain;
  Grid range;
  // gaussian_blur
  double sigma = 0.0;
  BlurBoundary boundary = BlurBoundary::periodic;
  std::vector<std::vector<double>> kernels;  // per axis, index k -> offset k-R
  // dense_matrix
  io::DenseMatrix matrix;
  double adjoint_scale = 1.0;  // w_range / w_domain
};

namespace {

std::vector<double> gaussian_kernel(double sigma, double h) {
  const auto radius = static_cast<std::ptrdiff_t>(std::floor(4.0 * sigma / h));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
    const double x = static_cast<double>(j) * h;
    const double v = std::exp(-0.5 * x * x / (sigma * sigma));
    k[static_cast<std::size_t>(j + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

// Correlates `in` with a symmetric kernel along one axis.
ScalarField blur_axis(const ScalarField& in, std::size_t axis,
                      const std::vector<double>& kernel,
                      BlurBoundary boundary) {
  const Grid& g = in.grid();
  const auto n = static_cast<std::ptrdiff_t>(g.shape(axis));
  const auto s = static_cast<std::ptrdiff_t>(g.stride(axis));
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  ScalarField out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto k = static_cast<std::ptrdiff_t>(g.axis_index(i, axis));
    const auto base = static_cast<std::ptrdiff_t>(i) - k * s;
    double acc = 0.0;
    for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
      std::ptrdiff_t m = k + j;
      if (boundary == BlurBoundary::periodic) {
        m = ((m % n) + n) % n;
      } else if (m < 0 || m >= n) {
        continue;
      }
      acc += kernel[static_cast<std::size_t>(j + radius)] *
             in[static_cast<std::size_t>(base + m * s)];
    }
    out[i] = acc;
  }
  return out;
}

ScalarField matvec(const io::DenseMatrix& m, const ScalarField& x,
                   const Grid& out_grid, bool transpose, double scale) {
  ScalarField y(out_grid);
  if (!transpose) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < m.cols; ++c) acc += m(r, c) * x[c];
      y[r] = acc * scale;
    }
  } else {
    for (std::size_t r = 0; r < m.rows; ++r) {
      const double xr = x[r];
      for (std::size_t c = 0; c < m.cols; ++c) y[c] += m(r, c) * xr;
    }
    if (scale != 1.0) y *= scale;
  }
  return y;
}

}  // namespace

LinearOperator LinearOperator::identity(Grid grid) {
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::identity;
  impl->domain = grid;
  impl->range = std::move(grid);
  return LinearOperator(std::move(impl), false);
}

LinearOperator LinearOperator::gaussian_blur(Grid grid, double sigma,
                                             BlurBoundary boundary) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error("gaussian_blur: sigma must be positive");
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::gaussian_blur;
  impl->sigma = sigma;
  impl->boundary = boundary;
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    impl->kernels.push_back(gaussian_kernel(sigma, grid.spacing(a)));
  }
  impl->domain = grid;
  impl->range = std::move(grid);
  return LinearOperator(std::move(impl), false);
}

LinearOperator LinearOperator::dense(io::DenseMatrix m, Grid domain,
                                     Grid range) {
  if (m.entries.size() != m.rows * m.cols) {
    throw Error("dense operator: entry count does not match rows*cols");
  }
  if (m.cols != domain.size() || m.rows != range.size()) {
    throw Error("dense operator: matrix is " + std::to_string(m.rows) + "x" +
                std::to_string(m.cols) + " but grids have " +
                std::to_string(range.size()) + " and " +
                std::to_string(domain.size()) + " points");
  }
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    if (!std::isfinite(m.entries[i])) {
      throw NonFiniteError("dense operator", i);
    }
  }
  auto impl = std::make_shared<Impl>();
  impl->kind = Kind::dense_matrix;
  impl->adjoint_scale = range.point_weight() / domain.point_weight();
  impl->matrix = std::move(m);
  impl->domain = std::move(domain);
  impl->range = std::move(range);
  return LinearOperator(std::move(impl), false);
}

LinearOperator::Kind LinearOperator::kind() const { return impl_->kind; }

const Grid& LinearOperator::domain_grid() const {
  return transposed_ ? impl_->range : impl_->domain;
}

const Grid& LinearOperator::range_grid() const {
  return transposed_ ? impl_->domain : impl_->range;
}

std::string LinearOperator::describe() const {
  std::ostringstream os;
  switch (impl_->kind) {
    case Kind::identity:
      os << "identity";
      break;
    case Kind::gaussian_blur:
      os << "blur:sigma=" << io::format_double(impl_->sigma) << ",boundary="
         << (impl_->boundary == BlurBoundary::periodic ? "periodic" : "zero");
      break;
    case Kind::dense_matrix:
      os << "matrix:" << impl_->matrix.rows << "x" << impl_->matrix.cols;
      break;
  }
  if (transposed_) os << "*";
  return os.str();
}

ScalarField LinearOperator::apply(const ScalarField& u) const {
  require_same_grid(u.grid(), domain_grid(), "operator apply");
  u.require_finite("operator apply");
  const Impl& im = *impl_;
  switch (im.kind) {
    case Kind::identity:
      return u;
    case Kind::gaussian_blur: {
      // Symmetric kernel: the operator is self-adjoint.
      ScalarField out = u;
      for (std::size_t a = 0; a < out.grid().dim(); ++a) {
        out = blur_axis(out, a, im.kernels[a], im.boundary);
      }
      return out;
    }
    case Kind::dense_matrix:
      if (!transposed_) {
        return matvec(im.matrix, u, im.range, false, 1.0);
      }
      return matvec(im.matrix, u, im.domain, true, im.adjoint_scale);
  }
  throw Error("unreachable operator kind");
}

ScalarField LinearOperator::adjoint_apply(const ScalarField& v) const {
  return adjoint().apply(v);
}

LinearOperator LinearOperator::adjoint() const {
  return LinearOperator(impl_, !transposed_);
}

ScalarField random_field(const Grid& grid, std::uint64_t seed) {
  SplitMix64 rng(seed);
  ScalarField f(grid);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rng.normal();
  return f;
}

EigenEstimate power_iteration(const FieldMap& op, const Grid& grid,
                              double tol, std::size_t max_iter,
                              std::uint64_t seed) {
  if (!(tol > 0.0)) throw Error("power_iteration: tol must be positive");
  EigenEstimate est;
  ScalarField x = random_field(grid, seed);
  x *= 1.0 / lp_norm(x, 2.0);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    ScalarField y = op(x);
    const double lambda = inner(x, y);
    est.eigenvalue = lambda;
    est.iterations = k;
    const double ynorm = lp_norm(y, 2.0);
    if (ynorm == 0.0) {
      est.eigenvalue = 0.0;
      est.residual = 0.0;
      est.converged = true;
      return est;
    }
    ScalarField r = y;
    r.axpy(-lambda, x);
    est.residual = lp_norm(r, 2.0) / std::abs(lambda);
    if (est.residual < tol) {
      est.converged = true;
      return est;
    }
    x = std::move(y);
    x *= 1.0 / ynorm;
  }
  return est;
}

OperatorNormEstimate operator_norm(const LinearOperator& T, double tol,
                                   std::size_t max_iter) {
  const LinearOperator Ts = T.adjoint();
  const EigenEstimate e = power_iteration(
      [&](const ScalarField& x) { return Ts.apply(T.apply(x)); },
      T.domain_grid(), tol, max_iter);
  return {std::sqrt(std::max(e.eigenvalue, 0.0)), e.iterations, e.residual,
          e.converged};
}

double adjoint_test(const FieldMap& forward, const FieldMap& backward,
                    const Grid& domain, const Grid& range, int trials,
                    std::uint64_t seed) {
  constexpr double eps = 1e-300;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto k = static_cast<std::uint64_t>(t);
    const ScalarField u = random_field(domain, seed + 2 * k);
    const ScalarField v = random_field(range, seed + 2 * k + 1);
    const ScalarField Tu = forward(u);
    const ScalarField Tsv = backward(v);
    const double defect = std::abs(inner(Tu, v) - inner(u, Tsv));
    worst = std::max(worst,
                     defect / (lp_norm(Tu, 2.0) * lp_norm(v, 2.0) + eps));
  }
  return worst;
}

double adjoint_test(const LinearOperator& T, int trials, std::uint64_t seed) {
  return adjoint_test([&](const ScalarField& u) { return T.apply(u); },
                      [&](const ScalarField& v) { return T.adjoint_apply(v); },
                      T.domain_grid(), T.range_grid(), trials, seed);
}

LinearOperator parse_operator(const std::string& spec, const Grid& grid) {
  const SpecString s = SpecString::parse(spec);
  if (s.name == "identity") {
    s.only({});
    return LinearOperator::identity(grid);
  }
  if (s.name == "blur") {
    s.only({"sigma", "boundary"});
    const std::string b = s.text("boundary", "periodic");
    BlurBoundary boundary;
    if (b == "periodic") {
      boundary = BlurBoundary::periodic;
    } else if (b == "zero") {
      boundary = BlurBoundary::zero;
    } else {
      throw Error("blur: boundary must be periodic or zero, got '" + b + "'");
    }
    return LinearOperator::gaussian_blur(grid, s.number("sigma"), boundary);
  }
  if (s.name == "matrix") {
    s.only({"path"});
    io::DenseMatrix m = io::read_matrix(s.text("path"));
    if (m.rows != grid.size() || m.cols != grid.size()) {
      throw Error("matrix operator: file holds a " + std::to_string(m.rows) +
                  "x" + std::to_string(m.cols) + " matrix, data grid has " +
                  std::to_string(grid.size()) + " points");
    }
    return LinearOperator::dense(std::move(m), grid, grid);
  }
  throw Error("unknown operator '" + s.name +
              "' (expected identity, blur or matrix)");
}

}  // namespace tvreg
