#include "tvreg/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>

namespace tvreg::io {

namespace {

class Writer {
 public:
  void tag(const char* t) { bytes_.insert(bytes_.end(), t, t + 4); }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) bytes_.push_back((v >> (8 * k)) & 0xFF);
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int k = 0; k < 8; ++k) bytes_.push_back((v >> (8 * k)) & 0xFF);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, const char* what)
      : bytes_(bytes), what_(what) {}

  void expect_tag(const char* t) {
    need(4);
    if (std::memcmp(bytes_.data() + pos_, t, 4) != 0) {
      throw Error(std::string(what_) + ": bad magic, expected \"" + t + "\"");
    }
    pos_ += 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
      v |= static_cast<std::uint32_t>(bytes_[pos_ + k]) << (8 * k);
    }
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) {
      v |= static_cast<std::uint64_t>(bytes_[pos_ + k]) << (8 * k);
    }
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) {
      throw Error(std::string(what_) + ": " +
                  std::to_string(bytes_.size() - pos_) + " trailing bytes");
    }
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(std::string(what_) + ": truncated input");
    }
  }
  const std::vector<std::uint8_t>& bytes_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_field(const ScalarField& field) {
  const Grid& g = field.grid();
  Writer w;
  w.tag("TVF1");
  w.u32(static_cast<std::uint32_t>(g.dim()));
  for (std::size_t a = 0; a < g.dim(); ++a) {
    w.u32(static_cast<std::uint32_t>(g.shape(a)));
  }
  for (std::size_t a = 0; a < g.dim(); ++a) w.f64(g.spacing(a));
  for (std::size_t a = 0; a < g.dim(); ++a) w.f64(g.origin(a));
  for (double v : field.values()) w.f64(v);
  return w.take();
}

ScalarField decode_field(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "TVF1");
  r.expect_tag("TVF1");
  const std::uint32_t dim = r.u32();
  if (dim < 1 || dim > kMaxDim) {
    throw Error("TVF1: unsupported dimension " + std::to_string(dim));
  }
  std::vector<std::size_t> shape(dim);
  std::vector<double> spacing(dim), origin(dim);
  for (auto& n : shape) n = r.u32();
  for (auto& h : spacing) h = r.f64();
  for (auto& o : origin) o = r.f64();
  Grid grid(shape, spacing, origin);
  std::vector<double> values(grid.size());
  for (auto& v : values) v = r.f64();
  r.expect_end();
  ScalarField field(std::move(grid), std::move(values));
  field.require_finite("TVF1");
  return field;
}

std::vector<std::uint8_t> encode_matrix(const DenseMatrix& m) {
  if (m.entries.size() != m.rows * m.cols) {
    throw Error("TVM1: entry count does not match rows*cols");
  }
  Writer w;
  w.tag("TVM1");
  w.u32(static_cast<std::uint32_t>(m.rows));
  w.u32(static_cast<std::uint32_t>(m.cols));
  for (double v : m.entries) w.f64(v);
  return w.take();
}

DenseMatrix decode_matrix(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes, "TVM1");
  r.expect_tag("TVM1");
  DenseMatrix m;
  m.rows = r.u32();
  m.cols = r.u32();
  if (m.rows == 0 || m.cols == 0) throw Error("TVM1: empty matrix");
  m.entries.resize(m.rows * m.cols);
  for (auto& v : m.entries) v = r.f64();
  r.expect_end();
  return m;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file: " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
  write_bytes(path, encode_field(field));
}

ScalarField read_field(const std::filesystem::path& path) {
  try {
    return decode_field(read_bytes(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void write_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  write_bytes(path, encode_matrix(m));
}

DenseMatrix read_matrix(const std::filesystem::path& path) {
  try {
    return decode_matrix(read_bytes(path));
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string digest(const ScalarField& field) {
  const auto bytes = encode_field(field);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k) {
    s[static_cast<std::size_t>(k)] = hex[h & 0xF];
    h >>= 4;
  }
  return s;
}

}  // namespace tvreg::io
