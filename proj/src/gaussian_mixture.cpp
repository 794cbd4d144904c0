#include "swvi/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace swvi {

Allocation parse_allocation(const std::string& name) {
  if (name == "iid") return Allocation::Iid;
  if (name == "stratified") return Allocation::Stratified;
  throw ValidationError("unknown allocation '" + name + "' (expected iid or stratified)");
}

std::string to_string(Allocation a) { return a == Allocation::Iid ? "iid" : "stratified"; }

GaussianMixture::GaussianMixture(std::vector<double> weights, std::vector<Vector> means,
                                 std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  if (means_.empty()) throw ValidationError("mixture needs at least one component");
  if (weights_.size() != means_.size() || covariances_.size() != means_.size())
    throw ValidationError("mixture weights, means and covariances differ in count");
  const Index d = means_.front().size();
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ValidationError("mixture weights must be nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw ValidationError("mixture weights sum to zero");
  for (double& w : weights_) w /= total;

  for (std::size_t k = 0; k < means_.size(); ++k) {
    const Matrix& s = covariances_[k];
    if (means_[k].size() != d || s.rows() != d || s.cols() != d)
      throw ValidationError("mixture component " + std::to_string(k) + " has wrong dimension");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + s.cwiseAbs().maxCoeff()))
      throw ValidationError("mixture covariance " + std::to_string(k) + " is not symmetric");
    Eigen::LLT<Matrix> llt(s);
    if (llt.info() != Eigen::Success)
      throw ValidationError("mixture covariance " + std::to_string(k) + " is not positive definite");
    Matrix l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    chol_.push_back(std::move(l));
    log_norm_.push_back(-0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) -
                        0.5 * logdet);
  }
}

GaussianMixture GaussianMixture::uniform(std::vector<Vector> means, std::vector<Matrix> covariances) {
  std::vector<double> w(means.size(), 1.0);
  return GaussianMixture(std::move(w), std::move(means), std::move(covariances));
}

GaussianMixture GaussianMixture::single(Vector mean, Matrix covariance) {
  return GaussianMixture({1.0}, {std::move(mean)}, {std::move(covariance)});
}

std::pair<double, Vector> GaussianMixture::logpdf_and_grad(const Vector& m) const {
  require_dims(m.size() == dim(), "point has wrong dimension for mixture");
  const std::size_t nk = means_.size();
  std::vector<double> logs(nk);
  std::vector<Vector> grads(nk);
  for (std::size_t k = 0; k < nk; ++k) {
    const Vector diff = m - means_[k];
    const Vector z = chol_[k].triangularView<Eigen::Lower>().solve(diff);
    logs[k] = std::log(weights_[k]) + log_norm_[k] - 0.5 * z.squaredNorm();
    // -Sigma^{-1} (m - mu)
    grads[k] = -chol_[k].transpose().triangularView<Eigen::Upper>().solve(z);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  Vector grad = Vector::Zero(dim());
  for (std::size_t k = 0; k < nk; ++k) {
    const double w = std::exp(logs[k] - top);
    sum += w;
    grad += w * grads[k];
  }
  return {top + std::log(sum), grad / sum};
}

double GaussianMixture::logpdf(const Vector& m) const { return logpdf_and_grad(m).first; }

std::vector<Index> allocate_counts(const std::vector<double>& weights, Index n, Rng& rng,
                                   Allocation alloc) {
  std::vector<Index> counts(weights.size(), 0);
  if (alloc == Allocation::Iid) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (Index i = 0; i < n; ++i) ++counts[pick(rng)];
    return counts;
  }
  std::vector<double> frac(weights.size());
  Index assigned = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double exact = weights[k] * static_cast<double>(n);
    counts[k] = static_cast<Index>(std::floor(exact));
    frac[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[order[i % order.size()]];
  return counts;
}

SampleMatrix GaussianMixture::sample(Index n, Rng& rng, Allocation alloc) const {
  SampleMatrix out(n, dim());
  if (alloc == Allocation::Stratified) {
    const auto counts = allocate_counts(weights_, n, rng, alloc);
    Index row = 0;
    for (std::size_t k = 0; k < counts.size(); ++k)
      for (Index i = 0; i < counts[k]; ++i, ++row)
        out.row(row) = (means_[k] + chol_[k] * standard_normal(rng, dim())).transpose();
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    SampleMatrix shuffled(n, dim());
    for (Index i = 0; i < n; ++i) shuffled.row(i) = out.row(perm[i]);
    return shuffled;
  }
  std::discrete_distribution<std::size_t> pick(weights_.begin(), weights_.end());
  for (Index i = 0; i < n; ++i) {
    const std::size_t k = pick(rng);
    out.row(i) = (means_[k] + chol_[k] * standard_normal(rng, dim())).transpose();
  }
  return out;
}

Vector GaussianMixture::mean() const {
  Vector mu = Vector::Zero(dim());
  for (std::size_t k = 0; k < means_.size(); ++k) mu += weights_[k] * means_[k];
  return mu;
}

Matrix GaussianMixture::covariance() const {
  const Vector mu = mean();
  Matrix c = Matrix::Zero(dim(), dim());
  for (std::size_t k = 0; k < means_.size(); ++k) {
    const Vector dm = means_[k] - mu;
    c += weights_[k] * (covariances_[k] + dm * dm.transpose());
  }
  return c;
}

std::pair<double, Vector> gmm_logpdf_and_grad(const GaussianMixture& gmm, const Vector& m) {
  return gmm.logpdf_and_grad(m);
}

}  // namespace swvi
