#pragma once

#include "swvi/forward_model.hpp"

namespace swvi {

/// Gaussian noise and prior used by the MAP objective. Covariances must be
/// symmetric positive definite.
struct GaussianSetting {
  Matrix noise_cov;   // Gamma_noise, n x n
  Matrix prior_cov;   // Sigma_0, d x d
  Vector prior_mean;  // m_0

  static GaussianSetting identity(Index n, Index d, const Vector& prior_mean);
};

/// P(m) = 1/2 sum_j |y_j - G(x_j, m)|^2_Gamma + 1/2 |m - m0|^2_Sigma0 with
/// |a|^2_A = a^T A^{-1} a.
double map_objective(const ForwardModel& model, const Dataset& data, const Vector& m,
                     const GaussianSetting& setting);

enum class GradientPath {
  Adjoint,  // J^T w through the model's adjoint route
  Direct,   // explicit Jacobian, then J^T w
};

/// dP/dm = -sum_j J_j^T Gamma^{-1} (y_j - G_j) + Sigma0^{-1} (m - m0).
Vector map_scalar_gradient(const ForwardModel& model, const Dataset& data, const Vector& m,
                           const GaussianSetting& setting,
                           GradientPath path = GradientPath::Adjoint);

}  // namespace swvi
