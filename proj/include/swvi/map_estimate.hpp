#pragma once

#include "swvi/gaussian_mixture.hpp"
#include "swvi/objective.hpp"

#include <functional>
#include <vector>

namespace swvi {

struct BfgsOptions {
  double gtol = 1e-6;      // stop when |grad|_inf <= gtol
  int max_iter = 500;
  double armijo_c1 = 1e-4;
  int max_backtracks = 60;
};

struct BfgsResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  Matrix inverse_hessian;  // final BFGS approximation, symmetrized
  int iterations = 0;
  bool converged = false;
};

using ValueAndGradient = std::function<std::pair<double, Vector>(const Vector&)>;

/// Dense inverse-Hessian BFGS from H0 = I with backtracking Armijo line
/// search. Before the first update H0 is rescaled to (s^T y / y^T y) I.
/// Updates with s^T y <= 0 are skipped.
BfgsResult bfgs_minimize(const ValueAndGradient& fg, const Vector& x0, const BfgsOptions& opts = {});

struct MapResult {
  Vector m_map;
  Matrix sigma1;            // posterior covariance estimate
  bool fallback = false;    // sigma1 replaced by the prior covariance
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
};

/// Minimizes the MAP objective from `setting.prior_mean`; Sigma_1 is the
/// final inverse-Hessian approximation, or Sigma_0 (flagged) when that is not
/// SPD.
MapResult map_estimate(const ForwardModel& model, const Dataset& data,
                       const GaussianSetting& setting, const BfgsOptions& opts = {});

struct MapMixture {
  GaussianMixture mixture;
  std::vector<MapResult> starts;  // one per prior point, in input order
  std::vector<bool> kept;         // false when the start failed and was dropped
};

/// One MAP estimate per row of `prior_points` (each used as m0 and as the
/// starting point), combined into a uniform-weight mixture.
MapMixture map_posterior_mixture(const ForwardModel& model, const Dataset& data,
                                 const SampleMatrix& prior_points, const Matrix& noise_cov,
                                 const Matrix& prior_cov, const BfgsOptions& opts = {});

/// Deterministic coverage set for a standard normal in d dimensions: the
/// origin, then rings s = 1, 2, ... of 2d axis points +-s e_i followed by 2d
/// diagonal points, cut to n points.
SampleMatrix gaussian_coverage_points(Index d, Index n);

}  // namespace swvi
