#pragma once

#include "swvi/rng.hpp"

#include <string>
#include <vector>

namespace swvi {

/// How component counts are chosen when drawing n samples.
enum class Allocation {
  Iid,         // component per sample drawn from the weights
  Stratified,  // floor(n w_k) per component, remainder by largest fraction
};

Allocation parse_allocation(const std::string& name);
std::string to_string(Allocation a);

/// Weighted mixture of multivariate normals. Weights are normalized on
/// construction; covariances must be SPD.
class GaussianMixture {
public:
  GaussianMixture() = default;
  GaussianMixture(std::vector<double> weights, std::vector<Vector> means,
                  std::vector<Matrix> covariances);

  static GaussianMixture uniform(std::vector<Vector> means, std::vector<Matrix> covariances);
  static GaussianMixture single(Vector mean, Matrix covariance);

  Index dim() const { return means_.empty() ? 0 : means_.front().size(); }
  std::size_t size() const { return means_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }

  double logpdf(const Vector& m) const;

  /// log-density and its gradient, log-sum-exp stabilized.
  std::pair<double, Vector> logpdf_and_grad(const Vector& m) const;

  /// n samples. Stratified rows are shuffled after drawing.
  SampleMatrix sample(Index n, Rng& rng, Allocation alloc = Allocation::Iid) const;

  /// Mixture mean and covariance.
  Vector mean() const;
  Matrix covariance() const;

private:
  std::vector<double> weights_;
  std::vector<Vector> means_;
  std::vector<Matrix> covariances_;
  std::vector<Matrix> chol_;       // lower Cholesky factors
  std::vector<double> log_norm_;   // -d/2 log(2 pi) - 1/2 log det Sigma
};

std::pair<double, Vector> gmm_logpdf_and_grad(const GaussianMixture& gmm, const Vector& m);

/// Per-component sample counts for n draws.
std::vector<Index> allocate_counts(const std::vector<double>& weights, Index n, Rng& rng,
                                   Allocation alloc);

}  // namespace swvi
