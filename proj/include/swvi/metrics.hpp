#pragma once

#include "swvi/forward_model.hpp"

#include <vector>

namespace swvi {

/// |a - ref| / |ref| (Frobenius for matrices). Throws for a zero reference.
double normalized_error(const Matrix& a, const Matrix& ref);

struct MomentReport {
  Vector e_mu;     // per column |mean - mean_ref| / |mean_ref|
  Vector e_sigma;  // per column |std - std_ref| / |std_ref|
  std::vector<bool> mu_flagged;     // reference mean is zero; e_mu holds the absolute error
  std::vector<bool> sigma_flagged;  // reference std is zero; e_sigma holds the absolute error
  Index n_samples = 0;
  Index n_reference = 0;
};

Vector sample_mean(const SampleMatrix& s);
/// Unbiased per-column standard deviation.
Vector sample_std(const SampleMatrix& s);

MomentReport moment_errors(const SampleMatrix& samples, const SampleMatrix& reference);

/// Row i holds G(x, samples.row(i)). Rows whose evaluation throws are skipped.
SampleMatrix push_forward(const ForwardModel& model, const Vector& x, const SampleMatrix& samples);

/// Fraction of rows within `radius` (Euclidean) of each mode.
std::vector<double> mode_fractions(const SampleMatrix& samples, const std::vector<Vector>& modes,
                                   double radius);

}  // namespace swvi
