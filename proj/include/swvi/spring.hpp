#pragma once

#include "swvi/forward_model.hpp"

#include <string>

namespace swvi {

enum class StiffnessMap { Exp, Square };

StiffnessMap parse_stiffness_map(const std::string& name);
std::string to_string(StiffnessMap g);

struct SpringStiffness {
  double k1;
  double k2;
};

// k1 = x1 g(m1) + 0.1, k2 = x2 g(m2) + 0.5
SpringStiffness spring_stiffness(const Vector& x, const Vector& m, StiffnessMap g);

/// Displacements of the two springs in series under unit end forces.
/// Throws SingularSystemError when either stiffness is not positive.
Vector spring_solve(const Vector& x, const Vector& m, StiffnessMap g);

/// Direct differentiation: column i is -K^{-1} (dK/dm_i) u.
Matrix spring_jacobian(const Vector& x, const Vector& m, StiffnessMap g);

class SpringModel final : public ForwardModel {
public:
  explicit SpringModel(StiffnessMap g = StiffnessMap::Exp) : g_(g) {}

  Index input_dim() const override { return 2; }
  Index latent_dim() const override { return 2; }
  Index output_dim() const override { return 2; }

  Vector evaluate(const Vector& x, const Vector& m) const override {
    return spring_solve(x, m, g_);
  }
  Matrix jacobian(const Vector& x, const Vector& m) const override {
    return spring_jacobian(x, m, g_);
  }

  StiffnessMap stiffness_map() const { return g_; }

  static constexpr double kForce1 = 1.0;
  static constexpr double kForce2 = 1.0;

private:
  StiffnessMap g_;
};

}  // namespace swvi
