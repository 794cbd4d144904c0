#include "doctest.h"

#include "swvi/inversion.hpp"
#include "swvi/metrics.hpp"
#include "swvi/spring.hpp"
#include "swvi/truth.hpp"

#include <random>

using namespace swvi;

namespace {
Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("newton_step examples") {
  const Matrix id = Matrix::Identity(2, 2);
  const Vector r = v2(1, 2);
  const Vector exact = newton_step(id, r, 0.0);
  CHECK((exact - r).norm() <= 1e-15);
  CHECK((newton_step(id, r, 1e-6) - r).norm() <= 1e-5);
  CHECK(newton_step(Matrix::Zero(3, 2), Vector::Ones(3), 1e-6).norm() == 0.0);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix j(6, 2);
  Vector res(6);
  for (Index a = 0; a < 6; ++a) {
    res(a) = n(rng);
    for (Index b = 0; b < 2; ++b) j(a, b) = n(rng);
  }
  const double delta = 1e-3;
  const Matrix normal = j.transpose() * j + delta * Matrix::Identity(2, 2);
  const Vector oracle = normal.completeOrthogonalDecomposition().pseudoInverse() * (j.transpose() * res);
  CHECK((newton_step(j, res, delta) - oracle).norm() <= 1e-10 * oracle.norm());
}

TEST_CASE("tikhonov schedule boundaries") {
  CHECK(tikhonov_for(0.02) == 1e-5);
  CHECK(tikhonov_for(0.009) == 1e-6);
  CHECK(tikhonov_for(0.01) == 1e-5);
}

TEST_CASE("invert_sample recovers m for the exp map") {
  const SpringModel model(StiffnessMap::Exp);
  const Vector x = v2(0.5, 0.5), m_true = v2(0.3, -0.4);
  const Vector y = model.evaluate(x, m_true);
  Rng rng(1);
  InversionOptions opts;
  opts.residual_tol = 1e-8;
  const InversionResult res = invert_sample(model, x, y, opts, rng);
  CHECK(res.converged);
  CHECK((res.m_opt - m_true).norm() <= 1e-3);
  CHECK(res.residual_norm <= opts.residual_tol);

  opts.init = InitPolicy::Fixed;
  opts.m_init = m_true;
  const InversionResult warm = invert_sample(model, x, y, opts, rng);
  CHECK(warm.converged);
  CHECK(warm.iterations <= 1);
}

TEST_CASE("invert_sample on the square map meets the residual tolerance") {
  const SpringModel model(StiffnessMap::Square);
  const Vector x = v2(0.5, 0.5);
  const Vector y = model.evaluate(x, v2(1.0, 1.0));
  Rng rng(2);
  InversionOptions opts;
  opts.init = InitPolicy::Fixed;
  opts.m_init = v2(0.5, -0.5);
  const InversionResult res = invert_sample(model, x, y, opts, rng);
  CHECK(res.converged);
  CHECK((model.evaluate(x, res.m_opt) - y).norm() <= opts.residual_tol);
  CHECK(std::abs(std::abs(res.m_opt(0)) - 1.0) <= 1e-2);
  CHECK(std::abs(std::abs(res.m_opt(1)) - 1.0) <= 1e-2);
}

TEST_CASE("max_iter cap is reported, not thrown") {
  const SpringModel model(StiffnessMap::Exp);
  const Vector x = v2(0.5, 0.5);
  Rng rng(3);
  InversionOptions opts;
  opts.max_iter = 2;
  opts.learning_rate = 0.01;
  const InversionResult res = invert_sample(model, x, model.evaluate(x, v2(2, 2)), opts, rng);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 2);
  CHECK(res.residual_history.size() == 2);
}

TEST_CASE("invert_dataset on a 200-pair unimodal dataset") {
  const SpringModel model(StiffnessMap::Exp);
  TruthSpec spec;
  spec.kind = TruthKind::Unimodal;
  const TruthSampler truth(spec);
  Rng rng(7);
  const SyntheticData syn = generate_spring_dataset(model, truth, 200, 0.005, rng);
  InversionOptions opts;
  const DatasetInversion inv = invert_dataset(model, syn.data, opts, 99);
  CHECK(inv.report.total == 200);
  CHECK(inv.report.converged == 200);
  CHECK(inv.report.residual_max <= 1e-3);

  // fixed point: data regenerated from m_opt, started at m_opt, stays put
  InversionOptions fixed = opts;
  fixed.init = InitPolicy::Fixed;
  for (Index i = 0; i < 200; i += 17) {
    const Vector m = inv.samples.row(i).transpose();
    fixed.m_init = m;
    Rng r(i);
    const InversionResult again =
        invert_sample(model, syn.data.input(i), model.evaluate(syn.data.input(i), m), fixed, r);
    CHECK(again.iterations == 0);
    CHECK(again.m_opt == m);
  }

  // recovered mean agrees with the latent draws within sampling error
  const Vector mean_rec = sample_mean(inv.samples);
  const Vector mean_lat = sample_mean(syn.latent);
  const Vector sd = sample_std(syn.latent);
  for (Index i = 0; i < 2; ++i) CHECK(std::abs(mean_rec(i) - mean_lat(i)) <= 3.0 * sd(i) / std::sqrt(200.0));

  // same seed, same rows
  const DatasetInversion inv3 = invert_dataset(model, syn.data, opts, 99);
  CHECK(inv3.samples == inv.samples);
}

TEST_CASE("invert_with_noise row layout and degenerate noise") {
  const SpringModel model(StiffnessMap::Exp);
  TruthSpec spec;
  spec.kind = TruthKind::Bimodal;
  const TruthSampler truth(spec);
  Rng rng(8);
  const SyntheticData syn = generate_spring_dataset(model, truth, 20, 0.005, rng);
  InversionOptions opts;
  opts.max_iter = 2000;

  const DatasetInversion plain = invert_dataset(model, syn.data, opts, 5);
  const DatasetInversion zero = invert_with_noise(model, syn.data, 0.0, 1, opts, 5);
  CHECK(zero.samples.rows() == 20);
  CHECK((zero.samples - plain.samples).cwiseAbs().maxCoeff() <= 1e-12);

  double prev = 0.0;
  for (double level : {1e-3, 1e-2, 1e-1}) {
    const DatasetInversion noisy = invert_with_noise(model, syn.data, level, 5, opts, 5);
    CHECK(noisy.samples.rows() == 100);
    // spread of each sample's noisy copies around their own mean
    double spread = 0.0;
    for (Index i = 0; i < 20; ++i) {
      const SampleMatrix block = noisy.samples.middleRows(i * 5, 5);
      const Vector c = sample_mean(block);
      for (Index k = 0; k < 5; ++k) spread += (block.row(k).transpose() - c).squaredNorm();
    }
    CHECK(spread > prev);
    prev = spread;
  }
}

TEST_CASE("options validation") {
  InversionOptions opts;
  opts.learning_rate = 0.0;
  CHECK_THROWS_AS(opts.validate(), ValidationError);
  opts = InversionOptions{};
  opts.init = InitPolicy::Fixed;
  CHECK_THROWS_AS(opts.validate(), ValidationError);
}
