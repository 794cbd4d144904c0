#include "swvi/spring.hpp"

#include <cmath>

namespace swvi {

namespace {

double g_value(double m, StiffnessMap g) {
  return g == StiffnessMap::Exp ? std::exp(m) : m * m;
}

double g_derivative(double m, StiffnessMap g) {
  return g == StiffnessMap::Exp ? std::exp(m) : 2.0 * m;
}

void check_args(const Vector& x, const Vector& m) {
  require_dims(x.size() == 2 && m.size() == 2, "spring model expects 2-vectors x and m");
}

void check_positive(const SpringStiffness& k) {
  if (!(k.k1 > 0.0) || !(k.k2 > 0.0))
    throw SingularSystemError("spring system singular: k1=" + std::to_string(k.k1) +
                              ", k2=" + std::to_string(k.k2));
}

}  // namespace

StiffnessMap parse_stiffness_map(const std::string& name) {
  if (name == "exp") return StiffnessMap::Exp;
  if (name == "square") return StiffnessMap::Square;
  throw ValidationError("unknown stiffness map '" + name + "' (expected exp|square)");
}

std::string to_string(StiffnessMap g) { return g == StiffnessMap::Exp ? "exp" : "square"; }

SpringStiffness spring_stiffness(const Vector& x, const Vector& m, StiffnessMap g) {
  check_args(x, m);
  return {x(0) * g_value(m(0), g) + 0.1, x(1) * g_value(m(1), g) + 0.5};
}

Vector spring_solve(const Vector& x, const Vector& m, StiffnessMap g) {
  const SpringStiffness k = spring_stiffness(x, m, g);
  check_positive(k);
  constexpr double f1 = SpringModel::kForce1;
  constexpr double f2 = SpringModel::kForce2;
  Vector u(2);
  u(1) = (f1 + f2) / k.k2;
  u(0) = u(1) + f1 / k.k1;
  return u;
}

Matrix spring_jacobian(const Vector& x, const Vector& m, StiffnessMap g) {
  const SpringStiffness k = spring_stiffness(x, m, g);
  check_positive(k);
  const Eigen::Vector2d u = spring_solve(x, m, g);
  // det = k1 k2; the generic 2x2 inverse cancels catastrophically for stiff springs
  Eigen::Matrix2d inverse;
  inverse << 1.0 / k.k1 + 1.0 / k.k2, 1.0 / k.k2, 1.0 / k.k2, 1.0 / k.k2;

  const double dk1 = x(0) * g_derivative(m(0), g);
  const double dk2 = x(1) * g_derivative(m(1), g);
  Eigen::Matrix2d dk_dm1;
  dk_dm1 << dk1, -dk1, -dk1, dk1;
  Eigen::Matrix2d dk_dm2;
  dk_dm2 << 0.0, 0.0, 0.0, dk2;

  Matrix jac(2, 2);
  jac.col(0) = -inverse * (dk_dm1 * u);
  jac.col(1) = -inverse * (dk_dm2 * u);
  return jac;
}

}  // namespace swvi
