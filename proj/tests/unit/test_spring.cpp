#include "doctest.h"
#include "support.hpp"

#include "swvi/spring.hpp"

#include <random>

using namespace swvi;

namespace {
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("spring stiffness hand values") {
  auto k = spring_stiffness(v2(0.5, 0.5), v2(0, 0), StiffnessMap::Exp);
  CHECK(k.k1 == doctest::Approx(0.6));
  CHECK(k.k2 == doctest::Approx(1.0));

  k = spring_stiffness(v2(0, 0), v2(5, 5), StiffnessMap::Exp);
  CHECK(k.k1 == doctest::Approx(0.1));
  CHECK(k.k2 == doctest::Approx(0.5));
  k = spring_stiffness(v2(0, 0), v2(5, 5), StiffnessMap::Square);
  CHECK(k.k1 == doctest::Approx(0.1));

  k = spring_stiffness(v2(1, 1), v2(1, -1), StiffnessMap::Square);
  CHECK(k.k1 == doctest::Approx(1.1));
  CHECK(k.k2 == doctest::Approx(1.5));
}

TEST_CASE("spring solve closed form") {
  const Vector u = spring_solve(v2(0.5, 0.5), v2(0, 0), StiffnessMap::Exp);
  CHECK(u(0) == doctest::Approx(11.0 / 3.0).epsilon(1e-14));
  CHECK(u(1) == doctest::Approx(2.0).epsilon(1e-14));

  // rigid first spring
  const Vector stiff = spring_solve(v2(0.5, 0.5), v2(30, 0), StiffnessMap::Exp);
  CHECK(stiff(0) - stiff(1) < 1e-10);
}

TEST_CASE("spring closed form agrees with a dense solve") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(0.1, 1.0), um(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Vector x = v2(ux(rng), ux(rng));
    const Vector m = v2(um(rng), um(rng));
    for (auto g : {StiffnessMap::Exp, StiffnessMap::Square}) {
      const auto k = spring_stiffness(x, m, g);
      Eigen::Matrix2d a;
      a << k.k1, -k.k1, -k.k1, k.k1 + k.k2;
      const Eigen::Vector2d dense = a.lu().solve(Eigen::Vector2d(1.0, 1.0));
      const Vector closed = spring_solve(x, m, g);
      CHECK((closed - Vector(dense)).norm() <= 1e-12 * dense.norm());
    }
  }
}

TEST_CASE("spring jacobian matches central differences") {
  const Vector x = v2(0.5, 0.5);
  const Vector m = v2(0.3, -0.2);
  const auto f = [&](const Vector& mm) { return spring_solve(x, mm, StiffnessMap::Exp); };
  const Matrix fd = test::central_difference(f, m, 1e-6);
  CHECK(test::max_column_rel_error(spring_jacobian(x, m, StiffnessMap::Exp), fd) <= 1e-6);
}

TEST_CASE("spring jacobian property over random draws") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.2, 1.0), um(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = v2(ux(rng), ux(rng));
    const Vector m = v2(um(rng), um(rng));
    for (auto g : {StiffnessMap::Exp, StiffnessMap::Square}) {
      if (g == StiffnessMap::Square && m.cwiseAbs().minCoeff() < 0.05) continue;
      const auto f = [&](const Vector& mm) { return spring_solve(x, mm, g); };
      const Matrix fd = test::central_difference(f, m, 1e-6);
      worst = std::max(worst, test::max_column_rel_error(spring_jacobian(x, m, g), fd));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("square map is stationary at the origin") {
  const Matrix j = spring_jacobian(v2(0.5, 0.5), v2(0, 0), StiffnessMap::Square);
  CHECK(j.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("symmetric inputs: du2/dm1 vanishes and du1/dm1 follows the first spring") {
  const Vector x = v2(0.7, 0.7);
  const Vector m = v2(0.4, 0.4);
  const Matrix j = spring_jacobian(x, m, StiffnessMap::Exp);
  const auto f = [&](const Vector& mm) { return spring_solve(x, mm, StiffnessMap::Exp); };
  const Matrix fd = test::central_difference(f, m, 1e-6);
  CHECK(std::abs(j(1, 0)) <= 1e-14);
  CHECK(std::abs(fd(1, 0)) <= 1e-8);
  const double k1 = 0.7 * std::exp(0.4) + 0.1;
  CHECK(j(0, 0) == doctest::Approx(-0.7 * std::exp(0.4) / (k1 * k1)).epsilon(1e-12));
}

TEST_CASE("spring evaluation is deterministic") {
  SpringModel model;
  const Vector a = model.evaluate(v2(0.9, 0.8), v2(2, 2));
  const Vector b = model.evaluate(v2(0.9, 0.8), v2(2, 2));
  CHECK(a == b);
}

TEST_CASE("negative stiffness is rejected") {
  CHECK_THROWS_AS(spring_solve(v2(-1.0, 0.5), v2(1.0, 0.0), StiffnessMap::Square),
                  SingularSystemError);
  CHECK_THROWS_AS(spring_jacobian(v2(0.5, -2.0), v2(0.0, 1.0), StiffnessMap::Square),
                  SingularSystemError);
  CHECK_THROWS_AS(parse_stiffness_map("cubic"), ValidationError);
}
