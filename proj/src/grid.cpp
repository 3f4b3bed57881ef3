#include "tvreg/grid.hpp"

#include <cmath>
#include <sstream>

namespace tvreg {

Grid::Grid(std::vector<std::size_t> shape, std::vector<double> spacing,
           std::vector<double> origin) {
  if (shape.empty() || shape.size() > kMaxDim) {
    throw Error("grid dimension must be 1, 2 or 3, got " +
                std::to_string(shape.size()));
  }
  if (spacing.size() != shape.size()) {
    throw Error("grid spacing has " + std::to_string(spacing.size()) +
                " entries, expected " + std::to_string(shape.size()));
  }
  if (origin.empty()) origin.assign(shape.size(), 0.0);
  if (origin.size() != shape.size()) {
    throw Error("grid origin has " + std::to_string(origin.size()) +
                " entries, expected " + std::to_string(shape.size()));
  }
  dim_ = shape.size();
  size_ = 1;
  for (std::size_t a = 0; a < dim_; ++a) {
    if (shape[a] < 2) {
      throw Error("grid axis " + std::to_string(a) +
                  " needs at least 2 points");
    }
    if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a])) {
      throw Error("grid spacing must be positive and finite on axis " +
                  std::to_string(a));
    }
    if (!std::isfinite(origin[a])) {
      throw Error("grid origin must be finite");
    }
    shape_[a] = shape[a];
    spacing_[a] = spacing[a];
    origin_[a] = origin[a];
    size_ *= shape[a];
  }
  std::size_t s = 1;
  for (std::size_t a = dim_; a-- > 0;) {
    stride_[a] = s;
    s *= shape_[a];
  }
}

Grid Grid::box(std::vector<std::size_t> shape, std::vector<double> extent) {
  if (extent.size() != shape.size()) {
    throw Error("extent and shape must have the same length");
  }
  std::vector<double> spacing(shape.size());
  for (std::size_t a = 0; a < shape.size(); ++a) {
    if (shape[a] < 2) throw Error("grid axis needs at least 2 points");
    spacing[a] = extent[a] / static_cast<double>(shape[a] - 1);
  }
  return Grid(std::move(shape), std::move(spacing));
}

double Grid::volume() const {
  double v = 1.0;
  for (std::size_t a = 0; a < dim_; ++a) v *= extent(a);
  return v;
}

double Grid::diameter() const {
  double s = 0.0;
  for (std::size_t a = 0; a < dim_; ++a) s += extent(a) * extent(a);
  return std::sqrt(s);
}

double Grid::max_spacing() const {
  double h = 0.0;
  for (std::size_t a = 0; a < dim_; ++a) h = std::max(h, spacing_[a]);
  return h;
}

double Grid::min_extent() const {
  double e = extent(0);
  for (std::size_t a = 1; a < dim_; ++a) e = std::min(e, extent(a));
  return e;
}

bool Grid::operator==(const Grid& other) const {
  if (dim_ != other.dim_) return false;
  for (std::size_t a = 0; a < dim_; ++a) {
    if (shape_[a] != other.shape_[a] || spacing_[a] != other.spacing_[a] ||
        origin_[a] != other.origin_[a]) {
      return false;
    }
  }
  return true;
}

std::string Grid::describe() const {
  std::ostringstream os;
  for (std::size_t a = 0; a < dim_; ++a) {
    if (a) os << 'x';
    os << shape_[a];
  }
  os << " h=(";
  for (std::size_t a = 0; a < dim_; ++a) {
    if (a) os << ',';
    os << spacing_[a];
  }
  os << ')';
  return os.str();
}

DomainGeometry geometry(const Grid& grid) {
  return {grid.volume(), grid.diameter()};
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (a != b) {
    throw Error(std::string(context) + ": grid mismatch (" + a.describe() +
                " vs " + b.describe() + ")");
  }
}

ScalarField::ScalarField(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.size(), fill) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error("field has " + std::to_string(values_.size()) +
                " values but grid has " + std::to_string(grid_.size()) +
                " points");
  }
}

void ScalarField::require_finite(const char* context) const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw NonFiniteError(std::string(context) + ": non-finite input", i);
    }
  }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& x) {
  require_same_grid(grid_, x.grid_, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * x[i];
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

VectorField::VectorField(Grid grid)
    : grid_(std::move(grid)),
      components_(grid_.dim(), std::vector<double>(grid_.size(), 0.0)) {}

void VectorField::require_finite(const char* context) const {
  for (const auto& c : components_) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!std::isfinite(c[i])) {
        throw NonFiniteError(std::string(context) + ": non-finite input", i);
      }
    }
  }
}

}  // namespace tvreg
