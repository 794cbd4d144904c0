#include "swvi/kl_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <numeric>
#include <string>

namespace swvi {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxLogModulus = 700.0;

template <typename F>
double bisect(F&& f, double lo, double hi) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (!(f_lo * f_hi < 0.0))
    throw Error("eigenvalue root not bracketed in [" + std::to_string(lo) + ", " +
                std::to_string(hi) + "]; too many modes requested");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid < 0.0) == (f_lo < 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double ExpEigenPair1d::operator()(double x) const {
  const double t = frequency * (x - 0.5);
  return amplitude * (even ? std::cos(t) : std::sin(t));
}

std::vector<ExpEigenPair1d> exp_kernel_eigenpairs_1d(int n_modes, double correlation_length) {
  if (n_modes < 1) throw ValidationError("n_modes must be at least 1");
  if (!(correlation_length > 0.0)) throw ValidationError("correlation length must be positive");
  const double ell = correlation_length;
  constexpr double half = 0.5;
  // Stay clear of the tangent poles at the bracket ends.
  constexpr double eps = 1e-12;

  std::vector<ExpEigenPair1d> pairs;
  pairs.reserve(n_modes);
  for (int k = 0; static_cast<int>(pairs.size()) < n_modes; ++k) {
    {
      // even: 1 - l w tan(w/2) = 0 with w/2 in (k pi, k pi + pi/2)
      auto f = [ell](double w) { return 1.0 - ell * w * std::tan(half * w); };
      const double lo = (k * kPi + eps) / half;
      const double hi = (k * kPi + 0.5 * kPi - eps) / half;
      const double w = bisect(f, lo, hi);
      ExpEigenPair1d p;
      p.frequency = w;
      p.even = true;
      p.eigenvalue = 2.0 * ell / (ell * ell * w * w + 1.0);
      p.amplitude = 1.0 / std::sqrt(half + std::sin(2.0 * w * half) / (2.0 * w));
      pairs.push_back(p);
    }
    if (static_cast<int>(pairs.size()) == n_modes) break;
    {
      // odd: l w + tan(w/2) = 0 with w/2 in (k pi + pi/2, (k+1) pi)
      auto f = [ell](double w) { return ell * w + std::tan(half * w); };
      const double lo = (k * kPi + 0.5 * kPi + eps) / half;
      const double hi = ((k + 1) * kPi - eps) / half;
      const double w = bisect(f, lo, hi);
      ExpEigenPair1d p;
      p.frequency = w;
      p.even = false;
      p.eigenvalue = 2.0 * ell / (ell * ell * w * w + 1.0);
      p.amplitude = 1.0 / std::sqrt(half - std::sin(2.0 * w * half) / (2.0 * w));
      pairs.push_back(p);
    }
  }
  return pairs;
}

KlBasisValues kl_basis_2d(const NodeArray& points, int d, double correlation_length) {
  if (d < 1) throw ValidationError("KL truncation order must be at least 1");
  // The top d products never use a 1D mode beyond index d-1.
  const auto pairs = exp_kernel_eigenpairs_1d(d, correlation_length);

  struct Candidate {
    double lambda;
    int i;
    int j;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      candidates.push_back({pairs[i].eigenvalue * pairs[j].eigenvalue, i, j});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.lambda > b.lambda; });

  KlBasisValues out;
  out.values.resize(points.rows(), d);
  out.eigenvalues.resize(d);
  out.modes.reserve(d);
  for (int c = 0; c < d; ++c) {
    const auto& cand = candidates[c];
    out.eigenvalues(c) = cand.lambda;
    out.modes.emplace_back(cand.i, cand.j);
    for (Index p = 0; p < points.rows(); ++p)
      out.values(p, c) = pairs[cand.i](points(p, 0)) * pairs[cand.j](points(p, 1));
  }
  return out;
}

Matrix transform_basis(const Matrix& basis) {
  Matrix out(basis.rows(), basis.cols());
  for (Index c = 0; c < basis.cols(); ++c) {
    // column c is the (c+1)-th basis function
    if (c % 2 == 0)
      out.col(c) = basis.col(c).array().sin();
    else
      out.col(c) = basis.col(c).array().cos();
  }
  return out;
}

KlBasis::KlBasis(Vector eigenvalues, Matrix basis_at_centroids, bool transformed)
    : eigenvalues_(std::move(eigenvalues)),
      basis_(std::move(basis_at_centroids)),
      transformed_(transformed) {
  require_dims(basis_.cols() == eigenvalues_.size(), "KL basis columns must match eigenvalue count");
  for (Index i = 0; i < eigenvalues_.size(); ++i)
    if (!(eigenvalues_(i) > 0.0)) throw ValidationError("KL eigenvalues must be positive");
  scaled_ = basis_ * eigenvalues_.cwiseSqrt().asDiagonal();
}

KlBasis make_kl_basis(const Mesh& mesh, int d, bool transform, double correlation_length) {
  auto values = kl_basis_2d(mesh.centroids(), d, correlation_length);
  Matrix basis = transform ? transform_basis(values.values) : std::move(values.values);
  return KlBasis(std::move(values.eigenvalues), std::move(basis), transform);
}

double log_modulus(const KlBasis& basis, const Vector& m, Index element) {
  require_dims(m.size() == basis.dim(), "latent vector length must equal KL order");
  if (element < 0 || element >= basis.num_elements())
    throw DimensionError("element index " + std::to_string(element) + " out of range");
  return basis.scaled_basis().row(element).dot(m);
}

double modulus_field(const KlBasis& basis, const Vector& m, Index element) {
  const double exponent = log_modulus(basis, m, element);
  if (!(exponent <= kMaxLogModulus))
    throw AssemblyError("modulus overflow at element " + std::to_string(element) +
                        " (log-modulus " + std::to_string(exponent) + ")");
  return std::exp(exponent);
}

Vector modulus_field(const KlBasis& basis, const Vector& m) {
  Vector out(basis.num_elements());
  for (Index e = 0; e < basis.num_elements(); ++e) out(e) = modulus_field(basis, m, e);
  return out;
}

void write_basis_csv(const KlBasis& basis, const Mesh& mesh, const std::filesystem::path& path) {
  require_dims(mesh.num_elements() == basis.num_elements(), "mesh and basis element counts differ");
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "cx,cy";
  for (Index i = 0; i < basis.dim(); ++i) out << ",E" << (i + 1);
  out << '\n' << std::setprecision(17);
  for (Index e = 0; e < basis.num_elements(); ++e) {
    const auto c = mesh.centroid(e);
    out << c.x() << ',' << c.y();
    for (Index i = 0; i < basis.dim(); ++i) out << ',' << basis.basis_at_centroids()(e, i);
    out << '\n';
  }
}

}  // namespace swvi
