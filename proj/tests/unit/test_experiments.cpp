#include "doctest.h"

#include "swvi/config.hpp"
#include "swvi/metrics.hpp"
#include "swvi/spring.hpp"
#include "swvi/truth.hpp"

#include <json.hpp>

using namespace swvi;
using nlohmann::json;

TEST_CASE("analytic map examples") {
  Vector x(2);
  x << 0.0, 0.0;
  CHECK(analytic_map(x).norm() == 0.0);
  x << 0.5, 0.5;
  CHECK(analytic_map(x)(0) == doctest::Approx(std::sin(4.05)));
  CHECK(analytic_map(x)(0) == doctest::Approx(-0.788525).epsilon(1e-6));
  CHECK(analytic_map(x)(1) == doctest::Approx(0.45));
  x << 1.0, 0.0;
  CHECK(analytic_map(x)(0) == doctest::Approx(std::sin(8.0)));
  CHECK(analytic_map(x)(1) == 1.0);
}

TEST_CASE("truth samplers match their mixture moments") {
  Rng rng(1);
  TruthSpec bim;
  bim.kind = TruthKind::Bimodal;
  const SampleMatrix b = TruthSampler(bim).sample(100000, rng);
  CHECK(sample_mean(b).cwiseAbs().maxCoeff() <= 0.02);

  TruthSpec uni;
  uni.kind = TruthKind::Unimodal;
  const SampleMatrix u = TruthSampler(uni).sample(100000, rng);
  const Matrix c = u.rowwise() - u.colwise().mean();
  const Matrix cov = c.transpose() * c / (u.rows() - 1.0);
  Matrix ref(2, 2);
  ref << 1.4, 0.63, 0.63, 0.41;
  CHECK(((cov - ref).array().abs() / ref.array().abs()).maxCoeff() <= 0.05);
  CHECK(sample_mean(u)(0) == doctest::Approx(1.0).epsilon(0.02));

  TruthSpec tri;
  tri.kind = TruthKind::Trimodal;
  tri.dim = 10;
  const TruthSampler ts(tri);
  const GaussianMixture& g = ts.mixture();
  REQUIRE(g.size() == 3);
  Vector mu3(10);
  mu3 << Vector::Constant(5, 6.0), Vector::Constant(5, -1.0);
  CHECK(g.means()[2] == mu3);
  const SampleMatrix t = ts.sample(3000, rng);
  std::vector<Index> hits(3, 0);
  std::vector<Vector> sums(3, Vector::Zero(10));
  for (Index i = 0; i < t.rows(); ++i) {
    Index best = 0;
    double bd = 1e300;
    for (Index k = 0; k < 3; ++k) {
      const double d = (t.row(i).transpose() - g.means()[k]).norm();
      if (d < bd) bd = d, best = k;
    }
    ++hits[best];
    sums[best] += t.row(i).transpose();
  }
  for (Index k = 0; k < 3; ++k) {
    CHECK(hits[k] == 1000);
    CHECK((sums[k] / hits[k] - g.means()[k]).norm() <= 0.1);
  }

  const GaussianMixture b28 = builtin_mixture(TruthKind::Bimodal28);
  CHECK(b28.dim() == 28);
  CHECK(b28.means()[1] == Vector::Constant(28, 4.0));
  CHECK(b28.covariances()[0](0, 0) == doctest::Approx(0.11));
  CHECK(b28.covariances()[1](0, 0) == doctest::Approx(0.38));
  CHECK(builtin_mixture(TruthKind::UShape).size() == 9);
}

TEST_CASE("dataset generation") {
  const SpringModel model;
  TruthSpec spec;
  const TruthSampler truth(spec);
  Rng a(5), b(5);
  const SyntheticData d1 = generate_spring_dataset(model, truth, 200, 0.005, a);
  const SyntheticData d2 = generate_spring_dataset(model, truth, 200, 0.005, b);
  CHECK(d1.data.size() == 200);
  CHECK(d1.data.observations == d2.data.observations);
  CHECK(d1.data.inputs.minCoeff() >= 0.495);
  CHECK(d1.data.inputs.maxCoeff() <= 0.505);

  Rng c(6);
  const SyntheticData flat = generate_spring_dataset(model, truth, 10, 0.0, c);
  CHECK((flat.data.inputs.array() == 0.5).all());
  for (Index i = 0; i < 10; ++i)
    CHECK(flat.data.observation(i) == model.evaluate(flat.data.input(i), flat.latent.row(i).transpose()));
}

TEST_CASE("design inputs") {
  const Mesh mesh = structured_unit_square(10, 10);
  Rng rng(2);
  const std::vector<Vector> base = synthetic_design_fields(mesh, 40, rng);
  CHECK(base.size() == 40);
  const Matrix x = generate_design_inputs(base, 20, 10, rng);
  CHECK(x.rows() == 200);
  CHECK(x.cols() == mesh.num_elements());
  CHECK(x.minCoeff() >= 1e-3);
  CHECK(x.maxCoeff() <= 1.0);
  const Matrix z = generate_design_inputs(base, 20, 3, rng, 0.0);
  CHECK(z.row(0).transpose() == base[0]);
  CHECK(z.row(2).transpose() == base[0]);
}

TEST_CASE("normalized error and moment errors") {
  Matrix ref(2, 2);
  ref << 1, 2, 3, 4;
  CHECK(normalized_error(ref, ref) == 0.0);
  CHECK(normalized_error(2.0 * ref, ref) == doctest::Approx(1.0));
  CHECK(normalized_error(Matrix::Zero(2, 2), ref) == doctest::Approx(1.0));
  CHECK_THROWS(normalized_error(ref, Matrix::Zero(2, 2)));

  Rng rng(3);
  const SampleMatrix s = 1.0 + standard_normal(rng, 1000, 2).array();
  const MomentReport same = moment_errors(s, s);
  CHECK(same.e_mu.norm() == 0.0);
  CHECK(same.e_sigma.norm() == 0.0);

  const SampleMatrix shifted = s.array() + 0.3;
  const MomentReport sh = moment_errors(shifted, s);
  const Vector mu = sample_mean(s);
  for (Index j = 0; j < 2; ++j) {
    CHECK(sh.e_mu(j) == doctest::Approx(0.3 / std::abs(mu(j))).epsilon(1e-12));
    CHECK(sh.e_sigma(j) <= 1e-12);
  }

  // exact-moment synthetic set vs a large Monte Carlo reference
  const SampleMatrix big = 1.0 + standard_normal(rng, 1000000, 1).array();
  SampleMatrix exact(2, 1);
  exact << 1.0 - std::sqrt(0.5), 1.0 + std::sqrt(0.5);
  const MomentReport r = moment_errors(exact, big);
  CHECK(r.e_mu(0) <= 1e-2);
  CHECK(r.e_sigma(0) <= 1e-2);

  SampleMatrix zero_mean(2, 1);
  zero_mean << -1.0, 1.0;
  const MomentReport f = moment_errors(zero_mean.array() + 0.5, zero_mean);
  CHECK(f.mu_flagged[0]);
  CHECK(f.e_mu(0) == doctest::Approx(0.5));
}

TEST_CASE("mode fractions") {
  SampleMatrix s(4, 2);
  s << 2, 2, 2.5, 2, -2, -2, 0, 0;
  const auto f = mode_fractions(s, {Vector::Constant(2, 2.0), Vector::Constant(2, -2.0)}, 1.0);
  CHECK(f[0] == 0.5);
  CHECK(f[1] == 0.25);
}

TEST_CASE("config validation names the offending field") {
  const json base = json::parse(R"({"name": "t", "truth": {"kind": "unimodal"}})");
  CHECK_NOTHROW(parse_config(base));

  json bad = base;
  bad["truth"]["kind"] = "pentamodal";
  try {
    parse_config(bad);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("truth.kind") != std::string::npos);
  }

  json extra = base;
  extra["nnk"]["layerz"] = json::array({2, 3, 1});
  try {
    parse_config(extra);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("nnk.layerz") != std::string::npos);
  }

  json wrong_type = base;
  wrong_type["data"]["n_data"] = "many";
  CHECK_THROWS_AS(parse_config(wrong_type), ValidationError);

  json mismatch = base;
  mismatch["nnk"]["layers"] = json::array({3, 4, 1});
  CHECK_THROWS_AS(parse_config(mismatch), ValidationError);
}

TEST_CASE("bundled configs parse") {
  for (const char* name : {"spring_analytic", "spring_unimodal", "spring_bimodal"}) {
    const ExperimentConfig cfg =
        load_config(std::filesystem::path(SWVI_CONFIG_DIR) / (std::string(name) + ".json"));
    CHECK(cfg.name == name);
    CHECK(make_model(cfg)->latent_dim() == 2);
  }
}
