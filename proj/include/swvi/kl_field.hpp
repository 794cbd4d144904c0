#pragma once

#include "swvi/mesh.hpp"

#include <filesystem>
#include <utility>
#include <vector>

namespace swvi {

/// One eigenpair of the integral operator with kernel exp(-|x - x'| / l) on
/// [0, 1]. The eigenfunction is A cos(w (x - 1/2)) for even modes and
/// A sin(w (x - 1/2)) for odd ones, normalized in L2[0, 1].
struct ExpEigenPair1d {
  double eigenvalue = 0.0;
  double frequency = 0.0;
  bool even = true;
  double amplitude = 0.0;

  double operator()(double x) const;
};

/// First `n_modes` eigenpairs in descending eigenvalue order. Frequencies are
/// the roots of l w tan(w/2) = 1 (even) and l w + tan(w/2) = 0 (odd), found by
/// bisection inside the brackets where each branch changes sign.
std::vector<ExpEigenPair1d> exp_kernel_eigenpairs_1d(int n_modes, double correlation_length = 1.0);

struct KlBasisValues {
  Matrix values;                              // n_points x d, column i = E_i
  Vector eigenvalues;                         // descending
  std::vector<std::pair<int, int>> modes;     // (x-mode, y-mode) per column
};

/// Tensor-product eigenpairs of exp(-|x-x'|_1 / l) on [0,1]^2 evaluated at
/// `points`. Sorted by descending product eigenvalue; exact ties keep the
/// lexicographic (i, j) order.
KlBasisValues kl_basis_2d(const NodeArray& points, int d, double correlation_length = 1.0);

/// Column i (1-based) becomes sin(E_i) when i is odd and cos(E_i) when even.
Matrix transform_basis(const Matrix& basis);

/// Truncated log-modulus expansion cached at element centroids. Immutable.
class KlBasis {
public:
  KlBasis() = default;
  KlBasis(Vector eigenvalues, Matrix basis_at_centroids, bool transformed);

  Index dim() const { return eigenvalues_.size(); }
  Index num_elements() const { return basis_.rows(); }
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& basis_at_centroids() const { return basis_; }
  bool transformed() const { return transformed_; }

  /// Row e holds sqrt(lambda_i) * E_i(c_e); the log-modulus is this times m.
  const Matrix& scaled_basis() const { return scaled_; }

private:
  Vector eigenvalues_;
  Matrix basis_;
  Matrix scaled_;
  bool transformed_ = false;
};

KlBasis make_kl_basis(const Mesh& mesh, int d, bool transform, double correlation_length = 1.0);

/// log E at element e: sum_i sqrt(lambda_i) E_i(c_e) m_i.
double log_modulus(const KlBasis& basis, const Vector& m, Index element);

/// E(c_e, m) = exp(log_modulus). Throws AssemblyError when the exponent
/// exceeds 700.
double modulus_field(const KlBasis& basis, const Vector& m, Index element);

/// Modulus at every element.
Vector modulus_field(const KlBasis& basis, const Vector& m);

/// One row per element: centroid x, centroid y, E_1..E_d.
void write_basis_csv(const KlBasis& basis, const Mesh& mesh, const std::filesystem::path& path);

}  // namespace swvi
