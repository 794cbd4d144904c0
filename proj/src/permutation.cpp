#include "swvi/permutation.hpp"

#include <fstream>
#include <limits>

namespace swvi {

bool Box::contains(const Vector& p, double tol) const {
  return ((p - lower).array() >= -tol).all() && ((upper - p).array() >= -tol).all();
}

Box bounding_box(const SampleMatrix& samples) {
  if (samples.rows() == 0) throw ValidationError("bounding box of an empty sample set");
  return {samples.colwise().minCoeff().transpose(), samples.colwise().maxCoeff().transpose()};
}

SampleMatrix scale_to_box(const SampleMatrix& m0, const Box& box) {
  require_dims(m0.cols() == box.lower.size(), "prior samples and box differ in dimension");
  SampleMatrix out = m0.array().rowwise() * box.range().transpose().array();
  out.rowwise() += box.lower.transpose();
  return out;
}

SampleMatrix scale_prior(const SampleMatrix& m0, const SampleMatrix& m_opt) {
  return scale_to_box(m0, bounding_box(m_opt));
}

PermutationOutput permute(const SampleMatrix& m0, const SampleMatrix& m_opt) {
  require_dims(m0.rows() == m_opt.rows(), "prior and optimized samples differ in row count");
  require_dims(m0.cols() == m_opt.cols(), "prior and optimized samples differ in dimension");
  const Index n = m_opt.rows();
  const SampleMatrix scaled = scale_prior(m0, m_opt);

  PermutationOutput out;
  out.m_tilde.resize(n, m_opt.cols());
  out.pairing.resize(static_cast<std::size_t>(n));
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i) {
    Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
      if (used[k]) continue;
      const double dist = (scaled.row(k) - m_opt.row(i)).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = k;
      }
    }
    used[best] = 1;
    out.pairing[i] = best;
    out.m_tilde.row(i) = scaled.row(best);
  }
  return out;
}

void write_pairing_csv(const std::vector<Index>& pairing, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << "opt_index,prior_index\n";
  for (std::size_t i = 0; i < pairing.size(); ++i) f << i << ',' << pairing[i] << '\n';
}

}  // namespace swvi
