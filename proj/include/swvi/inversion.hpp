#pragma once

#include "swvi/forward_model.hpp"
#include "swvi/rng.hpp"

#include <optional>
#include <vector>

namespace swvi {

/// Residual-dependent Tikhonov parameter: `high` while |R|_2 >= threshold,
/// `low` afterwards.
struct TikhonovSchedule {
  double threshold = 0.01;
  double high = 1e-5;
  double low = 1e-6;

  double operator()(double residual_norm) const {
    return residual_norm >= threshold ? high : low;
  }
};

enum class InitPolicy {
  Zero,     // start every sample at the origin
  Fixed,    // start at `InversionOptions::m_init`
  Uniform,  // draw from U[init_lower, init_upper]^d with the sample's stream
};

struct InversionOptions {
  double learning_rate = 0.1;
  double residual_tol = 1e-3;
  int max_iter = 500;
  TikhonovSchedule tikhonov;
  InitPolicy init = InitPolicy::Zero;
  Vector m_init;
  double init_lower = -1.0;
  double init_upper = 1.0;
  // Plain gradient-descent iterations run before Gauss-Newton. Off by default.
  int warm_start_gd_iters = 0;
  double warm_start_gd_rate = 1e-3;

  void validate() const;
};

struct InversionResult {
  Vector m_opt;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;  // |R| at the start of every iteration
};

struct ConvergenceReport {
  Index total = 0;
  Index converged = 0;
  Index not_converged = 0;
  double residual_min = 0.0;
  double residual_median = 0.0;
  double residual_p90 = 0.0;
  double residual_max = 0.0;
  double mean_iterations = 0.0;
};

struct DatasetInversion {
  SampleMatrix samples;  // one row per inverted observation
  std::vector<InversionResult> results;
  ConvergenceReport report;
};

/// tikhonov_for(|R|) with the default schedule.
double tikhonov_for(double residual_norm);

/// Regularized Gauss-Newton step: solves (J^T J + delta I) D = J^T R.
Vector newton_step(const Matrix& jacobian, const Vector& residual, double delta);

/// Damped Gauss-Newton on G(x, m) = y: m <- m - beta * newton_step until
/// |G(x, m) - y| <= residual_tol or max_iter steps. Hitting the cap is
/// reported through `converged`, not thrown.
InversionResult invert_sample(const ForwardModel& model, const Vector& x, const Vector& y,
                              const InversionOptions& opts, Rng& rng);

/// Inverts every (x, y) pair independently. Sample i uses the stream
/// derive_seed(seed, i), so rows come back in dataset order and are
/// reproducible regardless of thread count.
DatasetInversion invert_dataset(const ForwardModel& model, const Dataset& data,
                                const InversionOptions& opts, std::uint64_t seed);

/// Solves G(x, m) + eta = y for `n_noise` draws eta ~ noise_level * N(0, I)
/// per pair. Row i * n_noise + k belongs to pair i and draw k. Samples that
/// hit max_iter are kept with converged = false.
DatasetInversion invert_with_noise(const ForwardModel& model, const Dataset& data,
                                   double noise_level, int n_noise, const InversionOptions& opts,
                                   std::uint64_t seed);

ConvergenceReport summarize(const std::vector<InversionResult>& results);

}  // namespace swvi
