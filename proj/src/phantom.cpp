#include "tvreg/phantom.hpp"

#include <cmath>
#include <numbers>

#include "tvreg/calculus.hpp"
#include "tvreg/random.hpp"
#include "tvreg/spec_string.hpp"

namespace tvreg {

namespace {

std::size_t axis_param(const SpecString& s, const Grid& grid) {
  const long long axis = s.has("axis") ? parse_int(s.text("axis"), "axis") : 0;
  if (axis < 0 || static_cast<std::size_t>(axis) >= grid.dim()) {
    throw Error("phantom '" + s.name + "': axis out of range");
  }
  return static_cast<std::size_t>(axis);
}

bool equal_extents(const Grid& grid) {
  for (std::size_t a = 1; a < grid.dim(); ++a) {
    if (grid.extent(a) != grid.extent(0)) return false;
  }
  return true;
}

double positive(const SpecString& s, const std::string& key) {
  const double v = s.number(key);
  if (!(v > 0.0)) throw Error("phantom '" + s.name + "': " + key + " must be > 0");
  return v;
}

}  // namespace

Phantom make_phantom(const std::string& spec, const Grid& grid) {
  const SpecString s = SpecString::parse(spec);
  Phantom p{spec, ScalarField(grid), std::nullopt};
  ScalarField& f = p.field;
  const double pi = std::numbers::pi;

  if (s.name == "ramp") {
    s.only({"a", "axis"});
    const double a = s.number("a");
    const std::size_t axis = axis_param(s, grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = a * (grid.coordinate(i, axis) - grid.origin(axis));
    }
    p.analytic_kappa = std::abs(a);
  } else if (s.name == "sine" || s.name == "product_sine") {
    s.only({"k", "amplitude"});
    const double k = s.number("k");
    const double A = s.number("amplitude", 1.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      double v = A;
      for (std::size_t a = 0; a < grid.dim(); ++a) {
        const double x = grid.coordinate(i, a) - grid.origin(a);
        v *= std::sin(k * pi * x / grid.extent(a));
      }
      f[i] = v;
    }
    // For nonzero integer k, |grad|^2 = (A k pi / l)^2 sum_a cos^2 prod sin^2
    // peaks at 1 where one factor is at a crest and another at a node.
    if (equal_extents(grid) && k == std::round(k) && k != 0.0 &&
        grid.dim() >= 1) {
      p.analytic_kappa = std::abs(A * k) * pi / grid.extent(0);
    }
  } else if (s.name == "bumps" || s.name == "gaussian_bumps") {
    s.only({"n", "width", "amplitude", "seed"});
    const long long n = parse_int(s.text("n"), "n");
    if (n < 0) throw Error("phantom 'bumps': n must be >= 0");
    const double width = positive(s, "width");
    const double A = s.number("amplitude", 1.0);
    const auto seed = static_cast<std::uint64_t>(
        s.has("seed") ? parse_int(s.text("seed"), "seed") : 1);
    SplitMix64 rng(seed);
    for (long long j = 0; j < n; ++j) {
      double center[kMaxDim] = {};
      for (std::size_t a = 0; a < grid.dim(); ++a) {
        center[a] = grid.origin(a) + grid.extent(a) * rng.uniform(0.25, 0.75);
      }
      const double height = A * rng.uniform(0.5, 1.0);
      for (std::size_t i = 0; i < f.size(); ++i) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < grid.dim(); ++a) {
          const double d = grid.coordinate(i, a) - center[a];
          r2 += d * d;
        }
        f[i] += height * std::exp(-0.5 * r2 / (width * width));
      }
    }
  } else if (s.name == "step" || s.name == "smoothed_step") {
    s.only({"width", "amplitude", "axis"});
    const double width = positive(s, "width");
    const double A = s.number("amplitude", 1.0);
    const std::size_t axis = axis_param(s, grid);
    const double mid = grid.origin(axis) + 0.5 * grid.extent(axis);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = 0.5 * A * (1.0 + std::tanh((grid.coordinate(i, axis) - mid) / width));
    }
    p.analytic_kappa = std::abs(A) / (2.0 * width);
  } else {
    throw Error("unknown phantom '" + s.name +
                "' (expected ramp, sine, bumps or step)");
  }
  f.require_finite("phantom");
  return p;
}

ScalarField add_noise(const ScalarField& f, double delta, std::uint64_t seed) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error("add_noise: delta must be a finite value >= 0");
  }
  if (delta == 0.0) return f;
  for (int attempt = 0; attempt < 2; ++attempt) {
    SplitMix64 rng(attempt == 0 ? seed : seed ^ 0x9e3779b97f4a7c15ULL);
    ScalarField n(f.grid());
    for (std::size_t i = 0; i < n.size(); ++i) n[i] = rng.normal();
    const double norm = lp_norm(n, 2.0);
    if (norm > 0.0) {
      ScalarField out = f;
      out.axpy(delta / norm, n);
      return out;
    }
  }
  throw Error("add_noise: noise draw has zero norm after reseeding");
}

std::vector<CorpusEntry> standard_corpus() {
  const Grid sq = Grid::box({32, 32}, {1.0, 1.0});
  const Grid cube = Grid::box({16, 16, 16}, {1.0, 1.0, 1.0});
  return {
      {"2d_ramp", "ramp:a=2", sq},
      {"2d_ramp_y", "ramp:a=1.5,axis=1", sq},
      {"2d_sine", "sine:k=1,amplitude=1", sq},
      {"2d_bumps", "bumps:n=3,width=0.3,amplitude=1,seed=11", sq},
      {"2d_step", "step:width=0.25,amplitude=1", sq},
      {"2d_sine_k2", "sine:k=2,amplitude=0.5", sq},
      {"3d_ramp", "ramp:a=2", cube},
      {"3d_ramp_z", "ramp:a=1,axis=2", cube},
      {"3d_sine", "sine:k=1,amplitude=1", cube},
      {"3d_bumps", "bumps:n=2,width=0.35,amplitude=1,seed=5", cube},
      {"3d_step", "step:width=0.25,amplitude=1,axis=1", cube},
      {"3d_sine_k2", "sine:k=2,amplitude=0.5", cube},
  };
}

}  // namespace tvreg
