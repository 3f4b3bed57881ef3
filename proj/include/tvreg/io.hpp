#ifndef TVREG_IO_HPP
#define TVREG_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tvreg/grid.hpp"

namespace tvreg::io {

// TVF1 field file, little-endian, no padding:
//   "TVF1" | u32 dim | dim x u32 shape | dim x f64 spacing | dim x f64 origin
//   | prod(shape) x f64 values (row-major)
//
// TVM1 matrix file:
//   "TVM1" | u32 rows | u32 cols | rows*cols x f64 entries (row-major)

struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major

  double operator()(std::size_t r, std::size_t c) const {
    return entries[r * cols + c];
  }
};

std::vector<std::uint8_t> encode_field(const ScalarField& field);
ScalarField decode_field(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m);
DenseMatrix decode_matrix(const std::vector<std::uint8_t>& bytes);

void write_field(const std::filesystem::path& path, const ScalarField& field);
ScalarField read_field(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix read_matrix(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Shortest decimal representation that round-trips (std::to_chars).
std::string format_double(double v);

/// 64-bit FNV-1a digest of the field's grid and values, as 16 hex digits.
std::string digest(const ScalarField& field);

}  // namespace tvreg::io

#endif  // TVREG_IO_HPP
