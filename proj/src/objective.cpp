#include "swvi/objective.hpp"

namespace swvi {

namespace {

Eigen::LLT<Matrix> spd_factor(const Matrix& a, const char* what) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success)
    throw ValidationError(std::string(what) + " must be symmetric positive definite");
  return llt;
}

void check_setting(const ForwardModel& model, const Dataset& data, const Vector& m,
                   const GaussianSetting& s) {
  require_dims(m.size() == model.latent_dim(), "latent vector has wrong length");
  require_dims(s.noise_cov.rows() == model.output_dim() && s.noise_cov.cols() == model.output_dim(),
               "noise covariance must be output_dim square");
  require_dims(s.prior_cov.rows() == m.size() && s.prior_cov.cols() == m.size(),
               "prior covariance must be latent_dim square");
  require_dims(s.prior_mean.size() == m.size(), "prior mean has wrong length");
  require_dims(data.observations.cols() == model.output_dim(), "observations have wrong width");
}

}  // namespace

GaussianSetting GaussianSetting::identity(Index n, Index d, const Vector& prior_mean) {
  return {Matrix::Identity(n, n), Matrix::Identity(d, d), prior_mean};
}

double map_objective(const ForwardModel& model, const Dataset& data, const Vector& m,
                     const GaussianSetting& setting) {
  check_setting(model, data, m, setting);
  const auto noise = spd_factor(setting.noise_cov, "noise covariance");
  const auto prior = spd_factor(setting.prior_cov, "prior covariance");
  double misfit = 0.0;
  for (Index j = 0; j < data.size(); ++j) {
    const Vector r = data.observation(j) - model.evaluate(data.input(j), m);
    misfit += r.dot(noise.solve(r));
  }
  const Vector dm = m - setting.prior_mean;
  return 0.5 * misfit + 0.5 * dm.dot(prior.solve(dm));
}

Vector map_scalar_gradient(const ForwardModel& model, const Dataset& data, const Vector& m,
                           const GaussianSetting& setting, GradientPath path) {
  check_setting(model, data, m, setting);
  const auto noise = spd_factor(setting.noise_cov, "noise covariance");
  const auto prior = spd_factor(setting.prior_cov, "prior covariance");
  Vector grad = prior.solve(m - setting.prior_mean);
  for (Index j = 0; j < data.size(); ++j) {
    const Vector x = data.input(j);
    const Vector weighted = noise.solve(data.observation(j) - model.evaluate(x, m));
    if (path == GradientPath::Adjoint)
      grad -= model.jacobian_transpose_product(x, m, weighted);
    else
      grad -= model.jacobian(x, m).transpose() * weighted;
  }
  return grad;
}

}  // namespace swvi
