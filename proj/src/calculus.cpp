#include "tvreg/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tvreg/random.hpp"

namespace tvreg {

VectorField gradient(const ScalarField& phi) {
  phi.require_finite("gradient");
  const Grid& g = phi.grid();
  VectorField out(g);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    const std::size_t s = g.stride(a);
    const std::size_t n = g.shape(a);
    const double inv_h = 1.0 / g.spacing(a);
    auto comp = out.component(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.axis_index(i, a) + 1 < n) {
        comp[i] = (phi[i + s] - phi[i]) * inv_h;
      }
    }
  }
  return out;
}

ScalarField divergence(const VectorField& p) {
  p.require_finite("divergence");
  const Grid& g = p.grid();
  ScalarField out(g);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    const std::size_t s = g.stride(a);
    const std::size_t n = g.shape(a);
    const double inv_h = 1.0 / g.spacing(a);
    const auto comp = p.component(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::size_t k = g.axis_index(i, a);
      double v = 0.0;
      if (k + 1 < n) v += comp[i];
      if (k > 0) v -= comp[i - s];
      out[i] += v * inv_h;
    }
  }
  return out;
}

ScalarField grad_magnitude(const ScalarField& phi) {
  const VectorField grad = gradient(phi);
  ScalarField out(phi.grid());
  for (std::size_t a = 0; a < grad.dim(); ++a) {
    const auto c = grad.component(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
  return out;
}

ScalarField smoothed_magnitude(const VectorField& p, double beta) {
  ScalarField out(p.grid(), beta);
  for (std::size_t a = 0; a < p.dim(); ++a) {
    const auto c = p.component(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(out[i]);
  return out;
}

double inner(const ScalarField& u, const ScalarField& v) {
  require_same_grid(u.grid(), v.grid(), "inner product");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s * u.grid().point_weight();
}

double inner(const VectorField& p, const VectorField& q) {
  require_same_grid(p.grid(), q.grid(), "inner product");
  double s = 0.0;
  for (std::size_t a = 0; a < p.dim(); ++a) {
    const auto pa = p.component(a);
    const auto qa = q.component(a);
    for (std::size_t i = 0; i < pa.size(); ++i) s += pa[i] * qa[i];
  }
  return s * p.grid().point_weight();
}

double lp_norm(const ScalarField& phi, double p) {
  const double w = phi.grid().point_weight();
  if (p == kInfNorm) {
    double m = 0.0;
    for (double v : phi.values()) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0.0;
  if (p == 1.0) {
    for (double v : phi.values()) s += std::abs(v);
    return s * w;
  }
  if (p == 2.0) {
    for (double v : phi.values()) s += v * v;
    return std::sqrt(s * w);
  }
  if (p == 4.0) {
    for (double v : phi.values()) s += (v * v) * (v * v);
    return std::sqrt(std::sqrt(s * w));
  }
  throw Error("lp_norm: unsupported exponent p=" + std::to_string(p) +
              " (supported: 1, 2, 4, inf)");
}

double l2_norm(const VectorField& p) { return std::sqrt(inner(p, p)); }

double tv(const ScalarField& phi) { return lp_norm(grad_magnitude(phi), 1.0); }

double smoothed_tv(const ScalarField& phi, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error("smoothed_tv: beta must be positive, got " +
                std::to_string(beta));
  }
  const ScalarField s = smoothed_magnitude(gradient(phi), beta);
  double sum = 0.0;
  for (double v : s.values()) sum += v;
  return sum * phi.grid().point_weight();
}

double bv_norm(const ScalarField& phi) {
  return lp_norm(phi, 1.0) + tv(phi);
}

namespace {

struct Padded {
  std::array<std::ptrdiff_t, 3> n{1, 1, 1};
  std::array<double, 3> h{0.0, 0.0, 0.0};
  std::array<std::ptrdiff_t, 3> stride{0, 0, 0};
};

Padded pad(const Grid& g) {
  Padded p;
  for (std::size_t a = 0; a < g.dim(); ++a) {
    p.n[a] = static_cast<std::ptrdiff_t>(g.shape(a));
    p.h[a] = g.spacing(a);
    p.stride[a] = static_cast<std::ptrdiff_t>(g.stride(a));
  }
  return p;
}

// Denominator |o * h|^gamma for an index offset o. Distances are formed from
// index offsets so that every caller sees bit-identical values.
double offset_power(const std::array<std::ptrdiff_t, 3>& o,
                    const std::array<double, 3>& h, double gamma) {
  double d2 = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double d = static_cast<double>(o[a]) * h[a];
    d2 += d * d;
  }
  return std::pow(std::sqrt(d2), gamma);
}

// Max of |phi[i+o] - phi[i]| / den over all i with i and i+o on the grid.
void scan_offset(std::span<const double> v, const Padded& p,
                 const std::array<std::ptrdiff_t, 3>& o, double den,
                 HolderEstimate& best) {
  std::array<std::ptrdiff_t, 3> lo{}, hi{};
  for (std::size_t a = 0; a < 3; ++a) {
    lo[a] = std::max<std::ptrdiff_t>(0, -o[a]);
    hi[a] = std::min<std::ptrdiff_t>(p.n[a], p.n[a] - o[a]);
    if (lo[a] >= hi[a]) return;
  }
  const std::ptrdiff_t shift =
      o[0] * p.stride[0] + o[1] * p.stride[1] + o[2] * p.stride[2];
  for (std::ptrdiff_t i0 = lo[0]; i0 < hi[0]; ++i0) {
    for (std::ptrdiff_t i1 = lo[1]; i1 < hi[1]; ++i1) {
      const std::ptrdiff_t base = i0 * p.stride[0] + i1 * p.stride[1];
      for (std::ptrdiff_t i2 = lo[2]; i2 < hi[2]; ++i2) {
        const std::ptrdiff_t i = base + i2 * p.stride[2];
        const double r = std::abs(v[i + shift] - v[i]) / den;
        if (r > best.value) {
          best.value = r;
          best.first = static_cast<std::size_t>(i);
          best.second = static_cast<std::size_t>(i + shift);
        }
      }
    }
  }
}

// Visits every offset with first nonzero component positive and
// |o_a| <= radius_a.
template <typename F>
void for_each_half_offset(const std::array<std::ptrdiff_t, 3>& radius,
                          F&& f) {
  std::array<std::ptrdiff_t, 3> o{};
  for (o[0] = 0; o[0] <= radius[0]; ++o[0]) {
    for (o[1] = (o[0] > 0 ? -radius[1] : 0); o[1] <= radius[1]; ++o[1]) {
      const bool lead = o[0] > 0 || o[1] > 0;
      for (o[2] = (lead ? -radius[2] : 1); o[2] <= radius[2]; ++o[2]) {
        f(o);
      }
    }
  }
}

}  // namespace

HolderEstimate holder_coefficient(const ScalarField& phi, double gamma,
                                  const HolderOptions& options) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error("holder_coefficient: gamma must lie in (0, 1], got " +
                std::to_string(gamma));
  }
  phi.require_finite("holder_coefficient");
  const Grid& g = phi.grid();
  const Padded p = pad(g);
  const auto v = phi.values();
  HolderEstimate best;

  if (g.size() <= options.exhaustive_threshold) {
    std::array<std::ptrdiff_t, 3> radius{p.n[0] - 1, p.n[1] - 1, p.n[2] - 1};
    for_each_half_offset(radius, [&](const std::array<std::ptrdiff_t, 3>& o) {
      scan_offset(v, p, o, offset_power(o, p.h, gamma), best);
    });
    return best;
  }

  best.lower_bound = true;
  const auto r = static_cast<std::ptrdiff_t>(options.neighbor_radius);
  std::array<std::ptrdiff_t, 3> radius{std::min(r, p.n[0] - 1),
                                       std::min(r, p.n[1] - 1),
                                       std::min(r, p.n[2] - 1)};
  for_each_half_offset(radius, [&](const std::array<std::ptrdiff_t, 3>& o) {
    scan_offset(v, p, o, offset_power(o, p.h, gamma), best);
  });

  // Stratified long-range pairs: the first point is drawn from the k-th of
  // `m` equal strata of the linear index range, the second uniformly.
  SplitMix64 rng(options.seed);
  const std::size_t n = g.size();
  const std::size_t m = options.random_pairs;
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<std::size_t>(
        (static_cast<double>(k) + rng.uniform()) * static_cast<double>(n) /
        static_cast<double>(m));
    const std::size_t j = rng.below(n);
    if (i >= n || i == j) continue;
    std::array<std::ptrdiff_t, 3> o{};
    for (std::size_t a = 0; a < g.dim(); ++a) {
      o[a] = static_cast<std::ptrdiff_t>(g.axis_index(j, a)) -
             static_cast<std::ptrdiff_t>(g.axis_index(i, a));
    }
    const double ratio =
        std::abs(v[j] - v[i]) / offset_power(o, p.h, gamma);
    if (ratio > best.value) {
      best.value = ratio;
      best.first = std::min(i, j);
      best.second = std::max(i, j);
    }
  }
  return best;
}

double holder_norm(const ScalarField& phi, double gamma,
                   const HolderOptions& options) {
  return lp_norm(phi, kInfNorm) +
         holder_coefficient(phi, gamma, options).value;
}

}  // namespace tvreg
