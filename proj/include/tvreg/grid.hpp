#ifndef TVREG_GRID_HPP
#define TVREG_GRID_HPP

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvreg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a field contains NaN or infinity.
class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, std::size_t index)
      : Error(what + " (first non-finite value at index " +
              std::to_string(index) + ")"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

inline constexpr std::size_t kMaxDim = 3;

/// Regular tensor-product grid on a box. Points are stored row-major
/// (last axis fastest). Axis a spans origin[a] .. origin[a] + (n[a]-1)*h[a].
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<std::size_t> shape, std::vector<double> spacing,
       std::vector<double> origin = {});

  /// Grid with `shape` points spanning `extent` per axis, origin at zero.
  static Grid box(std::vector<std::size_t> shape, std::vector<double> extent);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return size_; }
  std::size_t shape(std::size_t axis) const { return shape_[axis]; }
  double spacing(std::size_t axis) const { return spacing_[axis]; }
  double origin(std::size_t axis) const { return origin_[axis]; }
  std::size_t stride(std::size_t axis) const { return stride_[axis]; }
  double extent(std::size_t axis) const {
    return static_cast<double>(shape_[axis] - 1) * spacing_[axis];
  }

  std::vector<std::size_t> shape_vector() const {
    return {shape_.begin(), shape_.begin() + dim_};
  }
  std::vector<double> spacing_vector() const {
    return {spacing_.begin(), spacing_.begin() + dim_};
  }
  std::vector<double> origin_vector() const {
    return {origin_.begin(), origin_.begin() + dim_};
  }

  /// Index along `axis` of the point with linear index `i`.
  std::size_t axis_index(std::size_t i, std::size_t axis) const {
    return (i / stride_[axis]) % shape_[axis];
  }
  double coordinate(std::size_t i, std::size_t axis) const {
    return origin_[axis] +
           static_cast<double>(axis_index(i, axis)) * spacing_[axis];
  }

  /// True when the point has a full forward-difference stencil, i.e. it is
  /// not on the last slice of any axis.
  bool has_full_stencil(std::size_t i) const {
    for (std::size_t a = 0; a < dim_; ++a) {
      if (axis_index(i, a) + 1 >= shape_[a]) return false;
    }
    return true;
  }

  double volume() const;
  double diameter() const;
  double max_spacing() const;
  double min_extent() const;

  /// Quadrature weight of one grid point: |Omega| / size(). The weights sum
  /// to the domain volume so constant fields integrate exactly.
  double point_weight() const { return volume() / static_cast<double>(size_); }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

  std::string describe() const;

 private:
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::array<std::size_t, kMaxDim> shape_{};
  std::array<std::size_t, kMaxDim> stride_{};
  std::array<double, kMaxDim> spacing_{};
  std::array<double, kMaxDim> origin_{};
};

struct DomainGeometry {
  double volume = 0.0;    // |Omega|, product of extents
  double diameter = 0.0;  // r(Omega), length of the extent diagonal
};

DomainGeometry geometry(const Grid& grid);

/// Sampled scalar function, one value per grid point.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(Grid grid, double fill = 0.0);
  ScalarField(Grid grid, std::vector<double> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// Throws NonFiniteError naming the first offending index.
  void require_finite(const char* context) const;

  ScalarField& operator+=(const ScalarField& other);
  ScalarField& operator-=(const ScalarField& other);
  ScalarField& operator*=(double s);
  /// this += s * x
  ScalarField& axpy(double s, const ScalarField& x);

 private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/// Sampled vector field with grid.dim() components.
class VectorField {
 public:
  VectorField() = default;
  explicit VectorField(Grid grid);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t dim() const noexcept { return components_.size(); }
  std::span<const double> component(std::size_t a) const {
    return components_[a];
  }
  std::span<double> component(std::size_t a) { return components_[a]; }

  void require_finite(const char* context) const;

 private:
  Grid grid_;
  std::vector<std::vector<double>> components_;
};

void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace tvreg

#endif  // TVREG_GRID_HPP
