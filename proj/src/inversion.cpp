#include "swvi/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace swvi {

void InversionOptions::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("inversion.learning_rate must be positive");
  if (!(residual_tol > 0.0)) throw ValidationError("inversion.residual_tol must be positive");
  if (max_iter < 1) throw ValidationError("inversion.max_iter must be at least 1");
  if (!(tikhonov.high > 0.0) || !(tikhonov.low > 0.0))
    throw ValidationError("inversion.tikhonov values must be positive");
  if (init == InitPolicy::Fixed && m_init.size() == 0)
    throw ValidationError("inversion.m_init is required for init 'fixed'");
  if (init == InitPolicy::Uniform && !(init_lower < init_upper))
    throw ValidationError("inversion.init_lower must be below init_upper");
}

double tikhonov_for(double residual_norm) { return TikhonovSchedule{}(residual_norm); }

Vector newton_step(const Matrix& jacobian, const Vector& residual, double delta) {
  require_dims(jacobian.rows() == residual.size(), "Jacobian rows must match residual length");
  Matrix normal = jacobian.transpose() * jacobian;
  normal.diagonal().array() += delta;
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success)
    throw SingularSystemError("regularized normal equations are not positive definite");
  return llt.solve(jacobian.transpose() * residual);
}

InversionResult invert_sample(const ForwardModel& model, const Vector& x, const Vector& y,
                              const InversionOptions& opts, Rng& rng) {
  require_dims(y.size() == model.output_dim(), "observation has wrong length");
  const Index d = model.latent_dim();

  InversionResult result;
  switch (opts.init) {
    case InitPolicy::Zero:
      result.m_opt = Vector::Zero(d);
      break;
    case InitPolicy::Fixed:
      require_dims(opts.m_init.size() == d, "m_init has wrong length");
      result.m_opt = opts.m_init;
      break;
    case InitPolicy::Uniform: {
      std::uniform_real_distribution<double> unif(opts.init_lower, opts.init_upper);
      result.m_opt.resize(d);
      for (Index i = 0; i < d; ++i) result.m_opt(i) = unif(rng);
      break;
    }
  }
  Vector& m = result.m_opt;

  for (int it = 0; it < opts.warm_start_gd_iters; ++it) {
    const Vector r = model.evaluate(x, m) - y;
    m -= opts.warm_start_gd_rate * 2.0 * model.jacobian_transpose_product(x, m, r);
  }

  for (;;) {
    const Vector residual = model.evaluate(x, m) - y;
    const double norm = residual.norm();
    result.residual_norm = norm;
    if (norm <= opts.residual_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= opts.max_iter) break;
    result.residual_history.push_back(norm);
    const Matrix jac = model.jacobian(x, m);
    m -= opts.learning_rate * newton_step(jac, residual, opts.tikhonov(norm));
    ++result.iterations;
  }
  return result;
}

ConvergenceReport summarize(const std::vector<InversionResult>& results) {
  ConvergenceReport rep;
  rep.total = static_cast<Index>(results.size());
  if (results.empty()) return rep;
  std::vector<double> residuals;
  residuals.reserve(results.size());
  double iters = 0.0;
  for (const auto& r : results) {
    residuals.push_back(r.residual_norm);
    iters += r.iterations;
    if (r.converged) ++rep.converged;
  }
  rep.not_converged = rep.total - rep.converged;
  std::sort(residuals.begin(), residuals.end());
  auto quantile = [&](double q) {
    const auto idx = static_cast<std::size_t>(std::floor(q * (residuals.size() - 1)));
    return residuals[idx];
  };
  rep.residual_min = residuals.front();
  rep.residual_median = quantile(0.5);
  rep.residual_p90 = quantile(0.9);
  rep.residual_max = residuals.back();
  rep.mean_iterations = iters / static_cast<double>(results.size());
  return rep;
}

namespace {

DatasetInversion collect(std::vector<InversionResult> results, Index d) {
  DatasetInversion out;
  out.samples.resize(static_cast<Index>(results.size()), d);
  for (std::size_t i = 0; i < results.size(); ++i)
    out.samples.row(static_cast<Index>(i)) = results[i].m_opt.transpose();
  out.report = summarize(results);
  out.results = std::move(results);
  return out;
}

}  // namespace

DatasetInversion invert_dataset(const ForwardModel& model, const Dataset& data,
                                const InversionOptions& opts, std::uint64_t seed) {
  opts.validate();
  if (data.size() == 0) throw ValidationError("cannot invert an empty dataset");
  std::vector<InversionResult> results(static_cast<std::size_t>(data.size()));
  const auto n = static_cast<long>(data.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    results[i] = invert_sample(model, data.input(i), data.observation(i), opts, rng);
  }
  return collect(std::move(results), model.latent_dim());
}

DatasetInversion invert_with_noise(const ForwardModel& model, const Dataset& data,
                                   double noise_level, int n_noise, const InversionOptions& opts,
                                   std::uint64_t seed) {
  opts.validate();
  if (!(noise_level >= 0.0)) throw ValidationError("noise level must be nonnegative");
  if (n_noise < 1) throw ValidationError("need at least one noise draw per sample");
  const Index n = data.size();
  std::vector<InversionResult> results(static_cast<std::size_t>(n * n_noise));
  const auto total = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < total; ++i) {
    Rng noise_rng(derive_seed(seed ^ 0x6E6F697365ULL, static_cast<std::uint64_t>(i)));
    const Vector x = data.input(i);
    const Vector y = data.observation(i);
    for (int k = 0; k < n_noise; ++k) {
      const Vector eta = noise_level * standard_normal(noise_rng, y.size());
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i * n_noise + k)));
      results[i * n_noise + k] = invert_sample(model, x, y - eta, opts, rng);
    }
  }
  return collect(std::move(results), model.latent_dim());
}

}  // namespace swvi
