#pragma once

#include "swvi/gaussian_mixture.hpp"
#include "swvi/permutation.hpp"

#include <variant>
#include <vector>

namespace swvi {

/// Prior for the complexity cost: a Gaussian mixture, or a uniform density
/// on an axis-aligned box.
using SigmaPrior = std::variant<GaussianMixture, Box>;

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

struct SigmaOptions {
  std::vector<double> grid = log_spaced(1e-3, 1.0, 30);
  Index n_mc = 5000;
  std::uint64_t seed = 0;
};

struct SigmaResult {
  double sigma_star = 0.0;
  std::vector<double> grid;
  std::vector<double> cost;  // C1 estimate per grid point
};

/// q_sigma = uniform-weight mixture of N(c_i, sigma I) over the rows of
/// `centers`. Returns the Monte Carlo estimate of E_q[log q - log p].
/// For a box prior, q is restricted to the box (draws outside are discarded
/// and q renormalized by the inside fraction); +inf if no draw lands inside.
double complexity_cost(const SampleMatrix& centers, const SigmaPrior& prior, double sigma,
                       Index n_mc, std::uint64_t seed);

/// Grid minimizer of complexity_cost. The same base draws are reused at
/// every grid point.
SigmaResult optimize_sigma(const SampleMatrix& centers, const SigmaPrior& prior,
                           const SigmaOptions& opts = {});

/// Uniform-weight mixture of N(c_i, sigma I).
GaussianMixture isotropic_mixture(const SampleMatrix& centers, double sigma);

}  // namespace swvi
