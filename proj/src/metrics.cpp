#include "swvi/metrics.hpp"

#include <cmath>

namespace swvi {

double normalized_error(const Matrix& a, const Matrix& ref) {
  require_dims(a.rows() == ref.rows() && a.cols() == ref.cols(), "normalized error shape mismatch");
  const double denom = ref.norm();
  if (denom == 0.0) throw Error("normalized error against a zero reference");
  return (a - ref).norm() / denom;
}

Vector sample_mean(const SampleMatrix& s) { return s.colwise().mean().transpose(); }

Vector sample_std(const SampleMatrix& s) {
  if (s.rows() < 2) return Vector::Zero(s.cols());
  const Matrix centered = s.rowwise() - s.colwise().mean();
  return (centered.colwise().squaredNorm().array() / static_cast<double>(s.rows() - 1))
      .sqrt()
      .transpose();
}

MomentReport moment_errors(const SampleMatrix& samples, const SampleMatrix& reference) {
  require_dims(samples.cols() == reference.cols(), "moment errors need equal column counts");
  if (samples.rows() == 0 || reference.rows() == 0)
    throw ValidationError("moment errors of an empty sample set");
  const Vector mu = sample_mean(samples);
  const Vector mu_ref = sample_mean(reference);
  const Vector sd = sample_std(samples);
  const Vector sd_ref = sample_std(reference);
  MomentReport r;
  r.n_samples = samples.rows();
  r.n_reference = reference.rows();
  const Index d = samples.cols();
  r.e_mu.resize(d);
  r.e_sigma.resize(d);
  r.mu_flagged.assign(static_cast<std::size_t>(d), false);
  r.sigma_flagged.assign(static_cast<std::size_t>(d), false);
  for (Index j = 0; j < d; ++j) {
    const double dm = std::abs(mu(j) - mu_ref(j));
    const double ds = std::abs(sd(j) - sd_ref(j));
    if (mu_ref(j) == 0.0) {
      r.mu_flagged[j] = true;
      r.e_mu(j) = dm;
    } else {
      r.e_mu(j) = dm / std::abs(mu_ref(j));
    }
    if (sd_ref(j) == 0.0) {
      r.sigma_flagged[j] = true;
      r.e_sigma(j) = ds;
    } else {
      r.e_sigma(j) = ds / sd_ref(j);
    }
  }
  return r;
}

SampleMatrix push_forward(const ForwardModel& model, const Vector& x, const SampleMatrix& samples) {
  SampleMatrix out(samples.rows(), model.output_dim());
  Index used = 0;
  for (Index i = 0; i < samples.rows(); ++i) {
    try {
      out.row(used) = model.evaluate(x, samples.row(i).transpose()).transpose();
      ++used;
    } catch (const Error&) {
    }
  }
  out.conservativeResize(used, Eigen::NoChange);
  return out;
}

std::vector<double> mode_fractions(const SampleMatrix& samples, const std::vector<Vector>& modes,
                                   double radius) {
  std::vector<double> frac(modes.size(), 0.0);
  if (samples.rows() == 0) return frac;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    Index count = 0;
    for (Index i = 0; i < samples.rows(); ++i)
      if ((samples.row(i).transpose() - modes[k]).norm() <= radius) ++count;
    frac[k] = static_cast<double>(count) / static_cast<double>(samples.rows());
  }
  return frac;
}

}  // namespace swvi
