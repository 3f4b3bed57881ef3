#ifndef TVREG_PHANTOM_HPP
#define TVREG_PHANTOM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvreg/grid.hpp"

namespace tvreg {

// Phantom spec strings:
//   ramp:a=2[,axis=0]                     a * x_axis
//   sine:k=1[,amplitude=1]                A * prod_a sin(k pi x_a / l_a)
//   bumps:n=3,width=0.2[,amplitude=1,seed=1]
//                                         sum of n Gaussian bumps
//   step:width=0.1[,amplitude=1,axis=0]   A/2 (1 + tanh((x - l/2) / w))
// gaussian_bumps, product_sine and smoothed_step are accepted as aliases.
struct Phantom {
  std::string spec;
  ScalarField field;
  /// Exact sup of |grad phi| of the continuum function, when known.
  std::optional<double> analytic_kappa;
};

Phantom make_phantom(const std::string& spec, const Grid& grid);

/// f + delta * n / |n|_2 with n a standard normal field drawn from `seed`,
/// so |result - f|_2 = delta up to roundoff. A zero draw is retried once
/// with a derived seed.
ScalarField add_noise(const ScalarField& f, double delta, std::uint64_t seed);

struct CorpusEntry {
  std::string name;
  std::string spec;
  Grid grid;
};

/// Twelve smooth phantoms: six on the 32x32 unit square, six on the 16^3
/// unit cube.
std::vector<CorpusEntry> standard_corpus();

}  // namespace tvreg

#endif  // TVREG_PHANTOM_HPP
