#include "doctest.h"
#include "support.hpp"

#include "swvi/gaussian_mixture.hpp"
#include "swvi/truth.hpp"

#include <numeric>

using namespace swvi;

namespace {
Vector sample_mean_of(const SampleMatrix& s) { return s.colwise().mean().transpose(); }
}  // namespace

TEST_CASE("single component matches the multivariate normal log-density") {
  Vector mu(2);
  mu << 0.5, -1.0;
  Matrix cov(2, 2);
  cov << 2.0, 0.3, 0.3, 0.5;
  const GaussianMixture g = GaussianMixture::single(mu, cov);
  Vector m(2);
  m << 1.2, 0.1;
  const Vector r = m - mu;
  const double ref = -std::log(2.0 * M_PI) - 0.5 * std::log(cov.determinant()) -
                     0.5 * r.dot(cov.inverse() * r);
  CHECK(g.logpdf(m) == doctest::Approx(ref).epsilon(1e-13));
  const auto [v, grad] = gmm_logpdf_and_grad(g, m);
  CHECK(v == doctest::Approx(ref).epsilon(1e-13));
  CHECK((grad + cov.inverse() * r).norm() <= 1e-13);
}

TEST_CASE("mixture gradient matches central differences") {
  const GaussianMixture bim = builtin_mixture(TruthKind::Bimodal);
  const GaussianMixture ush = builtin_mixture(TruthKind::UShape);
  Rng rng(4);
  for (const GaussianMixture* g : {&bim, &ush}) {
    for (int t = 0; t < 50; ++t) {
      const Vector m = 2.0 * standard_normal(rng, 2);
      const Vector fd = test::central_gradient([&](const Vector& p) { return g->logpdf(p); }, m, 1e-5);
      const Vector an = g->logpdf_and_grad(m).second;
      CHECK((an - fd).norm() <= 1e-7 * std::max(1.0, an.norm()));
    }
  }
  // far tail stays finite through log-sum-exp
  const auto far = bim.logpdf_and_grad(Vector::Constant(2, 60.0));
  CHECK(std::isfinite(far.first));
  CHECK(far.second.allFinite());
}

TEST_CASE("midpoint gradient of bimodal mixtures") {
  Matrix s1(2, 2);
  s1 << 0.51, 0.49, 0.49, 0.51;
  const GaussianMixture sym =
      GaussianMixture::uniform({Vector::Constant(2, 2.0), Vector::Constant(2, -2.0)}, {s1, s1});
  CHECK(sym.logpdf_and_grad(Vector::Zero(2)).second.norm() <= 1e-14);

  // the built-in truth has mirrored covariances, so the origin is not a
  // stationary point: the second component is ~exp(-200) smaller there and
  // the gradient is inv(S1) mu1 = [2, 2] (mu1 is the unit-eigenvalue direction)
  const GaussianMixture bim = builtin_mixture(TruthKind::Bimodal);
  const Vector g = bim.logpdf_and_grad(Vector::Zero(2)).second;
  CHECK(g(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g(1) == doctest::Approx(2.0).epsilon(1e-12));
  Rng rng(3);
  CHECK(sample_mean_of(bim.sample(100000, rng, Allocation::Stratified)).cwiseAbs().maxCoeff() <= 0.02);
}

TEST_CASE("weights are normalized and moments are exact") {
  std::vector<Vector> means = {Vector::Constant(1, -1.0), Vector::Constant(1, 3.0)};
  std::vector<Matrix> covs = {Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 2.0)};
  const GaussianMixture g({1.0, 3.0}, means, covs);
  CHECK(g.weights()[0] == doctest::Approx(0.25));
  CHECK(g.mean()(0) == doctest::Approx(2.0));
  // 0.25 (0.5 + 1) + 0.75 (2 + 9) - 4
  CHECK(g.covariance()(0, 0) == doctest::Approx(0.25 * 1.5 + 0.75 * 11.0 - 4.0));
  CHECK_THROWS(GaussianMixture({1.0}, {Vector::Zero(2)}, {-Matrix::Identity(2, 2)}));
  CHECK_THROWS(GaussianMixture({-1.0, 2.0}, means, covs));
}

TEST_CASE("stratified allocation uses floor plus largest remainders") {
  Rng rng(1);
  const auto counts = allocate_counts({0.5, 0.3, 0.2}, 7, rng, Allocation::Stratified);
  CHECK(counts == std::vector<Index>{4, 2, 1});
  const auto iid = allocate_counts({0.5, 0.5}, 1000, rng, Allocation::Iid);
  CHECK(std::accumulate(iid.begin(), iid.end(), Index{0}) == 1000);

  const GaussianMixture bim = builtin_mixture(TruthKind::Bimodal);
  const SampleMatrix s = bim.sample(200, rng, Allocation::Stratified);
  Index positive = 0;
  for (Index i = 0; i < 200; ++i) positive += s(i, 0) + s(i, 1) > 0.0;
  CHECK(positive >= 95);
  CHECK(positive <= 105);
}
