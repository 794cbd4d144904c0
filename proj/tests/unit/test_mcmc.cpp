#include "doctest.h"

#include "swvi/mcmc.hpp"
#include "swvi/metrics.hpp"
#include "swvi/objective.hpp"
#include "swvi/spring.hpp"
#include "swvi/truth.hpp"

using namespace swvi;

TEST_CASE("distance likelihood examples") {
  SampleMatrix s(3, 1);
  s << 0.0, 1.0, 2.0;
  const Matrix w = Matrix::Identity(1, 1);
  CHECK(distance_neg_loglik(Vector::Zero(1), s, 2, w) == 1.0);
  CHECK(distance_neg_loglik(Vector::Constant(1, 1.0), s, 1, w) == 0.0);
  CHECK(distance_neg_loglik(Vector::Zero(1), s, 3, w) == 5.0);
  CHECK(distance_neg_loglik(Vector::Zero(1), s, 2, 3.0 * w) == 3.0);
  CHECK_THROWS(distance_neg_loglik(Vector::Zero(1), s, 4, w));
}

TEST_CASE("standard likelihood examples") {
  const SpringModel model;
  TruthSpec spec;
  const TruthSampler truth(spec);
  Rng rng(1);
  const Dataset one = generate_spring_dataset(model, truth, 1, 0.005, rng).data;
  Vector m(2);
  m << 0.3, 0.2;

  Dataset perfect = one;
  perfect.observations.row(0) = model.evaluate(one.input(0), m).transpose();
  CHECK(standard_neg_loglik(model, m, perfect, Matrix::Identity(2, 2)) == 0.0);

  const double base = standard_neg_loglik(model, m, one, Matrix::Identity(2, 2));
  CHECK(standard_neg_loglik(model, m, one, 4.0 * Matrix::Identity(2, 2)) == doctest::Approx(base / 4.0));

  // zero prior term: objective is half the likelihood term
  const GaussianSetting s = GaussianSetting::identity(2, 2, m);
  CHECK(base == doctest::Approx(2.0 * map_objective(model, one, m, s)));

  const auto [v, g] = standard_neg_loglik_and_grad(model, m, one, Matrix::Identity(2, 2));
  CHECK(v == doctest::Approx(base));
  CHECK((g - 2.0 * map_scalar_gradient(model, one, m, s)).norm() <= 1e-12);
}

TEST_CASE("MH always accepts uphill moves") {
  Rng rng(2);
  const ChainState c = mh_sample([](const Vector& m) { return 1e6 * m(0); }, Vector::Zero(1),
                                 Matrix::Identity(1, 1), 2000, rng);
  Index up = 0;
  for (Index i = 1; i < c.trace.rows(); ++i) {
    CHECK(c.trace(i, 0) >= c.trace(i - 1, 0));
    up += c.trace(i, 0) > c.trace(i - 1, 0);
  }
  CHECK(up == c.accept_count);
  CHECK(c.proposals == 2000);
  CHECK(c.accept_count > 900);
  CHECK(c.accept_count < 1100);
}

TEST_CASE("MH long-chain moments on a standard normal") {
  Rng rng(3);
  const ChainState c = mh_sample([](const Vector& m) { return -0.5 * m.squaredNorm(); },
                                 Vector::Zero(2), 2.8 * Matrix::Identity(2, 2), 100000, rng);
  CHECK(c.accept_count <= c.proposals);
  const SampleMatrix& t = c.trace;
  const Vector mean = sample_mean(t);
  const Matrix centered = t.rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(t.rows() - 1);
  CHECK(mean.cwiseAbs().maxCoeff() <= 0.05);
  CHECK((cov - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 0.1);
}

TEST_CASE("HMC energy error is second order in the step size") {
  const LogDensityAndGradient target = [](const Vector& m) {
    return std::make_pair(-0.5 * m.squaredNorm(), Vector(-m));
  };
  // trajectory length fixed at 1
  auto mean_error = [&](double eps) {
    Rng rng(4);
    const ChainState c =
        hmc_sample(target, Vector::Zero(2), eps, static_cast<int>(std::lround(1.0 / eps)), 4000, rng);
    double s = 0.0;
    for (double e : c.energy_errors) s += e;
    return s / static_cast<double>(c.energy_errors.size());
  };
  const double ratio = mean_error(0.1) / mean_error(0.05);
  CHECK(ratio >= 3.5);
  CHECK(ratio <= 4.5);
}

TEST_CASE("HMC on a flat target accepts everything") {
  Rng rng(5);
  const ChainState c = hmc_sample(
      [](const Vector&) { return std::make_pair(0.0, Vector(Vector::Zero(2))); }, Vector::Zero(2),
      0.1, 5, 500, rng);
  CHECK(c.accept_count == 500);
  CHECK(c.divergences == 0);
  for (double e : c.energy_errors) CHECK(e <= 1e-12);
}

TEST_CASE("HMC chains on the bimodal truth collapse onto one mode") {
  const GaussianMixture bim = builtin_mixture(TruthKind::Bimodal);
  const LogDensityAndGradient target = [&](const Vector& m) { return bim.logpdf_and_grad(m); };
  // [-3,-3] sits on the major axis of the [2,2] component (5 std) but on the
  // minor axis of the [-2,-2] one (10 std), so both starts end at [2,2]
  const Vector mode = Vector::Constant(2, 2.0);
  for (double s : {-3.0, 3.0}) {
    Rng rng(6);
    const ChainState c = hmc_sample(target, Vector::Constant(2, s), 0.05, 20, 3000, rng);
    Index near_mode = 0, near_other = 0;
    for (Index i = 500; i < c.trace.rows(); ++i) {
      const Vector m = c.trace.row(i).transpose();
      near_mode += (m - mode).norm() <= 2.0;
      near_other += (m + mode).norm() <= 2.0;
    }
    // major-axis std of each mode is 1, so radius 2 holds about 85% of it
    CHECK(near_mode >= 0.75 * (c.trace.rows() - 500));
    CHECK(near_other == 0);
  }
}

TEST_CASE("HMC rejects divergent trajectories") {
  Rng rng(7);
  const ChainState c = hmc_sample(
      [](const Vector& m) { return std::make_pair(-0.5 * m.squaredNorm(), Vector(-m)); },
      Vector::Zero(1), 5.0, 50, 50, rng);
  CHECK(c.divergences > 0);
  CHECK(c.accept_count + c.divergences <= c.proposals);
}
