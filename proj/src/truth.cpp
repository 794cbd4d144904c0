#include "swvi/truth.hpp"

#include <cmath>

namespace swvi {

TruthKind parse_truth_kind(const std::string& name) {
  if (name == "analytic") return TruthKind::Analytic;
  if (name == "unimodal") return TruthKind::Unimodal;
  if (name == "bimodal") return TruthKind::Bimodal;
  if (name == "ushape") return TruthKind::UShape;
  if (name == "unimodal6") return TruthKind::Unimodal6;
  if (name == "bimodal28") return TruthKind::Bimodal28;
  if (name == "trimodal") return TruthKind::Trimodal;
  if (name == "mixture") return TruthKind::Mixture;
  throw ValidationError("truth.kind: unknown truth kind '" + name + "'");
}

std::string to_string(TruthKind k) {
  switch (k) {
    case TruthKind::Analytic: return "analytic";
    case TruthKind::Unimodal: return "unimodal";
    case TruthKind::Bimodal: return "bimodal";
    case TruthKind::UShape: return "ushape";
    case TruthKind::Unimodal6: return "unimodal6";
    case TruthKind::Bimodal28: return "bimodal28";
    case TruthKind::Trimodal: return "trimodal";
    case TruthKind::Mixture: return "mixture";
  }
  return "unknown";
}

Vector analytic_map(const Vector& x) {
  require_dims(x.size() == 2, "analytic map takes a 2-vector");
  Vector m(2);
  m << std::sin(8.0 * x(0) + 0.1 * x(1)), x(0) - 0.1 * x(1);
  return m;
}

namespace {

Matrix diag_range(double start, double step, Index d) {
  Vector v(d);
  for (Index i = 0; i < d; ++i) v(i) = start + step * static_cast<double>(i);
  return v.asDiagonal();
}

}  // namespace

GaussianMixture builtin_mixture(TruthKind kind, Index dim) {
  switch (kind) {
    case TruthKind::Unimodal: {
      Matrix s(2, 2);
      s << 1.4, 0.63, 0.63, 0.41;
      return GaussianMixture::single(Vector::Ones(2), s);
    }
    case TruthKind::Bimodal: {
      Matrix s1(2, 2), s2(2, 2);
      s1 << 0.51, 0.49, 0.49, 0.51;
      s2 << 0.51, -0.49, -0.49, 0.51;
      return GaussianMixture::uniform({Vector::Constant(2, 2.0), Vector::Constant(2, -2.0)},
                                      {s1, s2});
    }
    case TruthKind::UShape: {
      const double pts[9][2] = {{-2, 2},  {-2, 0.67}, {-2, -0.67}, {-2, -2}, {0, -2},
                                {2, -2},  {2, -0.67}, {2, 0.67},   {2, 2}};
      std::vector<Vector> means;
      std::vector<Matrix> covs;
      for (const auto& p : pts) {
        Vector mu(2);
        mu << p[0], p[1];
        means.push_back(mu);
        covs.push_back(0.05 * Matrix::Identity(2, 2));
      }
      return GaussianMixture::uniform(std::move(means), std::move(covs));
    }
    case TruthKind::Unimodal6: {
      Vector mu(6);
      for (Index i = 0; i < 6; ++i) mu(i) = 1.1 + 0.1 * static_cast<double>(i);
      return GaussianMixture::single(mu, Matrix::Identity(6, 6));
    }
    case TruthKind::Bimodal28: {
      const Index d = dim > 0 ? dim : 28;
      return GaussianMixture::uniform(
          {Vector::Zero(d), Vector::Constant(d, 4.0)},
          {diag_range(0.11, 0.01, d), diag_range(0.11 + 0.01 * (d - 1), -0.01, d)});
    }
    case TruthKind::Trimodal: {
      const Index d = dim > 0 ? dim : 10;
      if (d % 2 != 0) throw ValidationError("truth.dim: trimodal truth needs an even dimension");
      Vector mu3(d);
      mu3.head(d / 2).setConstant(6.0);
      mu3.tail(d / 2).setConstant(-1.0);
      return GaussianMixture::uniform(
          {Vector::Zero(d), Vector::Constant(d, 4.0), mu3},
          {diag_range(0.11, 0.01, d), diag_range(0.11 + 0.01 * (d - 1), -0.01, d),
           0.1 * Matrix::Identity(d, d)});
    }
    case TruthKind::Analytic:
    case TruthKind::Mixture:
      break;
  }
  throw ValidationError("truth.kind: '" + to_string(kind) + "' has no built-in mixture");
}

TruthSampler::TruthSampler(TruthSpec spec) : spec_(std::move(spec)) {
  if (spec_.kind == TruthKind::Analytic) return;
  if (spec_.kind == TruthKind::Mixture) {
    if (!spec_.mixture) throw ValidationError("truth.components: required for a mixture truth");
    mixture_ = *spec_.mixture;
    return;
  }
  mixture_ = builtin_mixture(spec_.kind, spec_.dim);
}

Index TruthSampler::dim() const { return is_analytic() ? 2 : mixture_.dim(); }

const GaussianMixture& TruthSampler::mixture() const {
  if (is_analytic()) throw ValidationError("the analytic truth is not a mixture");
  return mixture_;
}

SampleMatrix TruthSampler::sample(Index n, Rng& rng) const {
  if (!is_analytic()) return mixture_.sample(n, rng, spec_.allocation);
  const Matrix x = uniform_unit(rng, n, 2);
  SampleMatrix m(n, 2);
  for (Index i = 0; i < n; ++i) m.row(i) = analytic_map(x.row(i).transpose()).transpose();
  return m;
}

TruthSampler make_truth(const TruthSpec& spec) { return TruthSampler(spec); }

Matrix spring_inputs(Index n, double delta_x, Rng& rng, const Vector& center) {
  if (!(delta_x >= 0.0)) throw ValidationError("data.delta_x must be nonnegative");
  Matrix x(n, center.size());
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < center.size(); ++j) x(i, j) = center(j) + delta_x * unif(rng);
  return x;
}

SyntheticData generate_dataset(const ForwardModel& model, const TruthSampler& truth,
                               const Matrix& inputs, Rng& rng) {
  if (inputs.rows() < 1) throw ValidationError("data.n_data must be at least 1");
  require_dims(inputs.cols() == model.input_dim(), "inputs do not match the model input dimension");
  require_dims(truth.dim() == model.latent_dim(), "truth dimension does not match the model");
  SyntheticData out;
  out.latent = truth.sample(inputs.rows(), rng);
  out.data.inputs = inputs;
  out.data.observations.resize(inputs.rows(), model.output_dim());
  for (Index i = 0; i < inputs.rows(); ++i) {
    try {
      out.data.observations.row(i) =
          model.evaluate(inputs.row(i).transpose(), out.latent.row(i).transpose()).transpose();
    } catch (const Error& e) {
      throw Error("data generation failed at sample " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

SyntheticData generate_spring_dataset(const ForwardModel& model, const TruthSampler& truth,
                                      Index n_data, double delta_x, Rng& rng) {
  const Matrix x = spring_inputs(n_data, delta_x, rng);
  return generate_dataset(model, truth, x, rng);
}

std::vector<Vector> synthetic_design_fields(const Mesh& mesh, int n_fields, Rng& rng,
                                            double volume_fraction, int n_bumps) {
  if (n_fields < 1) throw ValidationError("design.n_fields must be at least 1");
  const NodeArray c = mesh.centroids();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector pattern = Vector::Constant(mesh.num_elements(), 0.1);
  for (int b = 0; b < n_bumps; ++b) {
    const double bx = unif(rng);
    const double by = unif(rng);
    const double r = 0.1 + 0.2 * unif(rng);
    for (Index e = 0; e < c.rows(); ++e) {
      const double d2 = (c(e, 0) - bx) * (c(e, 0) - bx) + (c(e, 1) - by) * (c(e, 1) - by);
      pattern(e) += std::exp(-d2 / (2.0 * r * r));
    }
  }
  pattern = pattern.cwiseMin(1.0).cwiseMax(1e-3);
  std::vector<Vector> fields;
  for (int k = 0; k < n_fields; ++k) {
    const double t = n_fields == 1 ? 1.0 : static_cast<double>(k) / (n_fields - 1);
    fields.push_back(((1.0 - t) * Vector::Constant(c.rows(), volume_fraction) + t * pattern)
                         .cwiseMin(1.0)
                         .cwiseMax(1e-3));
  }
  return fields;
}

Matrix generate_design_inputs(const std::vector<Vector>& base_fields, int n_keep, int n_noise_per,
                              Rng& rng, double jitter) {
  if (base_fields.empty()) throw ValidationError("design: no base fields");
  if (n_keep < 1 || n_noise_per < 1) throw ValidationError("design: counts must be positive");
  if (!(jitter >= 0.0)) throw ValidationError("design.jitter must be nonnegative");
  const Index n_ele = base_fields.front().size();
  const auto n_base = static_cast<double>(base_fields.size());
  Matrix out(static_cast<Index>(n_keep) * n_noise_per, n_ele);
  Index row = 0;
  for (int k = 0; k < n_keep; ++k) {
    const auto idx = n_keep == 1 ? base_fields.size() - 1
                                 : static_cast<std::size_t>(std::lround(k * (n_base - 1) / (n_keep - 1)));
    const Vector& base = base_fields[idx];
    require_dims(base.size() == n_ele, "design base fields differ in length");
    for (int s = 0; s < n_noise_per; ++s, ++row)
      out.row(row) = (base + jitter * standard_normal(rng, n_ele)).cwiseMin(1.0).cwiseMax(1e-3).transpose();
  }
  return out;
}

}  // namespace swvi
