#include "doctest.h"
#include "support.hpp"

#include "swvi/map_estimate.hpp"
#include "swvi/spring.hpp"
#include "swvi/truth.hpp"

#include <Eigen/Eigenvalues>

using namespace swvi;

namespace {

// y = A m, independent of x
class LinearModel final : public ForwardModel {
public:
  explicit LinearModel(Matrix a) : a_(std::move(a)) {}
  Index input_dim() const override { return 1; }
  Index latent_dim() const override { return a_.cols(); }
  Index output_dim() const override { return a_.rows(); }
  Vector evaluate(const Vector&, const Vector& m) const override { return a_ * m; }
  Matrix jacobian(const Vector&, const Vector&) const override { return a_; }

private:
  Matrix a_;
};

Dataset spring_data(Index n, std::uint64_t seed) {
  const SpringModel model;
  TruthSpec spec;
  spec.kind = TruthKind::Unimodal;
  Rng rng(seed);
  return generate_spring_dataset(model, TruthSampler(spec), n, 0.005, rng).data;
}

}  // namespace

TEST_CASE("map objective examples") {
  const SpringModel model;
  const Dataset data = spring_data(5, 1);
  Vector m0(2);
  m0 << 0.2, -0.1;
  const GaussianSetting s = GaussianSetting::identity(2, 2, m0);

  Dataset perfect = data;
  for (Index i = 0; i < perfect.size(); ++i)
    perfect.observations.row(i) = model.evaluate(perfect.input(i), m0).transpose();
  CHECK(map_objective(model, perfect, m0, s) == 0.0);

  Vector m(2);
  m << 0.7, 0.4;
  double misfit = 0.0;
  for (Index i = 0; i < data.size(); ++i)
    misfit += (data.observation(i) - model.evaluate(data.input(i), m)).squaredNorm();
  CHECK(map_objective(model, data, m, s) == doctest::Approx(0.5 * (misfit + (m - m0).squaredNorm())));
}

TEST_CASE("map gradient: prior-only case and finite differences") {
  const SpringModel model;
  const Dataset data = spring_data(8, 2);
  Vector m0(2);
  m0 << 0.1, 0.3;
  Matrix prior(2, 2);
  prior << 2.0, 0.4, 0.4, 1.0;
  GaussianSetting s{0.5 * Matrix::Identity(2, 2), prior, m0};

  Vector m(2);
  m << 0.6, -0.2;
  Dataset exact = data;
  for (Index i = 0; i < exact.size(); ++i)
    exact.observations.row(i) = model.evaluate(exact.input(i), m).transpose();
  CHECK((map_scalar_gradient(model, exact, m, s) - prior.inverse() * (m - m0)).norm() <= 1e-12);

  const Vector fd = test::central_gradient(
      [&](const Vector& p) { return map_objective(model, data, p, s); }, m, 1e-6);
  const Vector g = map_scalar_gradient(model, data, m, s);
  CHECK((g - fd).norm() <= 1e-5 * g.norm());
  CHECK((map_scalar_gradient(model, data, m, s, GradientPath::Direct) - g).norm() <= 1e-12 * g.norm());
}

TEST_CASE("linear-Gaussian MAP matches the closed-form posterior") {
  Matrix a(3, 2);
  a << 1.0, 0.5, -0.3, 2.0, 0.8, 0.1;
  const LinearModel model(a);
  Dataset data;
  data.inputs = Matrix::Zero(4, 1);
  data.observations.resize(4, 3);
  data.observations << 1.0, 2.0, 0.5, 1.2, 1.8, 0.4, 0.9, 2.1, 0.6, 1.1, 1.9, 0.55;
  Matrix noise(3, 3);
  noise << 0.2, 0.05, 0.0, 0.05, 0.3, 0.0, 0.0, 0.0, 0.1;
  Matrix prior(2, 2);
  prior << 1.5, 0.2, 0.2, 0.8;
  Vector m0(2);
  m0 << -0.5, 0.3;
  const GaussianSetting s{noise, prior, m0};

  const Matrix ni = noise.inverse();
  const Matrix precision = 4.0 * a.transpose() * ni * a + prior.inverse();
  const Vector ysum = data.observations.colwise().sum().transpose();
  const Matrix post_cov = precision.inverse();
  const Vector post_mean = post_cov * (a.transpose() * ni * ysum + prior.inverse() * m0);

  BfgsOptions opts;
  opts.gtol = 1e-10;
  const MapResult r = map_estimate(model, data, s, opts);
  CHECK(r.converged);
  CHECK((r.m_map - post_mean).norm() <= 1e-6);
  CHECK_FALSE(r.fallback);
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.sigma1);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  CHECK(test::rel_error(r.sigma1, post_cov) <= 0.2);
}

TEST_CASE("weak data leaves the MAP at the prior mean") {
  const SpringModel model;
  const Dataset data = spring_data(10, 3);
  Vector m0(2);
  m0 << 0.4, -0.6;
  const GaussianSetting s{1e12 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), m0};
  const MapResult r = map_estimate(model, data, s);
  CHECK((r.m_map - m0).norm() <= 1e-6);
}

TEST_CASE("spring unimodal MAP covariance is SPD") {
  const SpringModel model;
  const Dataset data = spring_data(200, 4);
  const GaussianSetting s = GaussianSetting::identity(2, 2, Vector::Zero(2));
  const MapResult r = map_estimate(model, data, s);
  CHECK(r.converged);
  Eigen::SelfAdjointEigenSolver<Matrix> es(r.sigma1);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("MAP mixture over prior starts") {
  const SpringModel model;
  const Dataset data = spring_data(50, 5);
  const SampleMatrix one = SampleMatrix::Zero(1, 2);
  const MapMixture single =
      map_posterior_mixture(model, data, one, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(single.mixture.size() == 1);
  const MapResult direct =
      map_estimate(model, data, GaussianSetting::identity(2, 2, Vector::Zero(2)));
  CHECK((single.mixture.means()[0] - direct.m_map).norm() <= 1e-12);

  const SampleMatrix starts = gaussian_coverage_points(2, 17);
  const MapMixture mix =
      map_posterior_mixture(model, data, starts, Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK(mix.starts.size() == 17);
  for (double w : mix.mixture.weights()) CHECK(w == doctest::Approx(1.0 / mix.mixture.size()));
}

TEST_CASE("coverage points") {
  const SampleMatrix p = gaussian_coverage_points(2, 9);
  SampleMatrix expected(9, 2);
  expected << 0, 0, 1, 0, -1, 0, 0, 1, 0, -1, 1, 1, -1, -1, 1, -1, -1, 1;
  CHECK(p == expected);
  CHECK(gaussian_coverage_points(2, 17).row(9) == Eigen::RowVector2d(2, 0));
  CHECK(gaussian_coverage_points(3, 1).norm() == 0.0);
}

TEST_CASE("BFGS on the Rosenbrock function") {
  const ValueAndGradient rosen = [](const Vector& x) {
    const double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
    Vector g(2);
    g << -2.0 * a - 400.0 * x(0) * b, 200.0 * b;
    return std::make_pair(a * a + 100.0 * b * b, g);
  };
  Vector x0(2);
  x0 << -1.2, 1.0;
  BfgsOptions opts;
  opts.gtol = 1e-8;
  const BfgsResult r = bfgs_minimize(rosen, x0, opts);
  CHECK(r.converged);
  CHECK((r.x - Vector::Ones(2)).norm() <= 1e-6);
}
