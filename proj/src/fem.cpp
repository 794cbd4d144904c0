#include "swvi/fem.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace swvi {

namespace {

struct Factorized {
  Eigen::LLT<Matrix> llt;
  Vector modulus;  // per element: rho^p * E(c_e, m)
  Vector u;        // full nodal solution
};

void check_inputs(const FemProblem& problem, const Vector& design, const Vector& m) {
  require_dims(design.size() == problem.num_elements(),
               "design must have one density per element");
  require_dims(m.size() == problem.kl.dim(), "latent vector length must equal KL order");
}

Vector element_moduli(const FemProblem& problem, const Vector& design, const Vector& m) {
  Vector modulus(problem.num_elements());
  for (Index e = 0; e < problem.num_elements(); ++e) {
    const double value =
        std::pow(design(e), problem.simp_exponent) * modulus_field(problem.kl, m, e);
    if (!std::isfinite(value) || !(value > 0.0))
      throw AssemblyError("non-finite or non-positive modulus at element " + std::to_string(e));
    modulus(e) = value;
  }
  return modulus;
}

Matrix assemble_with(const FemProblem& problem, const Vector& modulus) {
  Matrix k = Matrix::Zero(problem.num_free, problem.num_free);
  for (Index e = 0; e < problem.num_elements(); ++e) {
    const auto& ke = problem.element_stiffness[e];
    for (int a = 0; a < 3; ++a) {
      const int ia = problem.free_index[problem.mesh.elements(e, a)];
      if (ia < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const int ib = problem.free_index[problem.mesh.elements(e, b)];
        if (ib < 0) continue;
        k(ia, ib) += modulus(e) * ke(a, b);
      }
    }
  }
  return k;
}

Vector restrict_free(const FemProblem& problem, const Vector& full) {
  Vector out(problem.num_free);
  for (Index k = 0; k < problem.num_nodes(); ++k)
    if (problem.free_index[k] >= 0) out(problem.free_index[k]) = full(k);
  return out;
}

Vector expand_free(const FemProblem& problem, const Vector& free) {
  Vector out = Vector::Zero(problem.num_nodes());
  for (Index k = 0; k < problem.num_nodes(); ++k)
    if (problem.free_index[k] >= 0) out(k) = free(problem.free_index[k]);
  return out;
}

Factorized factorize_and_solve(const FemProblem& problem, const Vector& design, const Vector& m) {
  check_inputs(problem, design, m);
  Factorized f;
  f.modulus = element_moduli(problem, design, m);
  f.llt.compute(assemble_with(problem, f.modulus));
  if (f.llt.info() != Eigen::Success)
    throw SingularSystemError("stiffness matrix is not numerically positive definite");
  f.u = expand_free(problem, f.llt.solve(restrict_free(problem, problem.load)));
  return f;
}

// Row e holds the element-local product modulus_e * K_e * u_e scattered to
// global node numbering, so (dK/dm_i) u = sum_e scaled_basis(e, i) * row_e.
// Returned as the n_nodes x d matrix whose column i is (dK/dm_i) u.
Matrix stiffness_derivative_times(const FemProblem& problem, const Factorized& f,
                                  const Vector& v) {
  const Index d = problem.kl.dim();
  const Matrix& scaled = problem.kl.scaled_basis();
  Matrix out = Matrix::Zero(problem.num_nodes(), d);
  for (Index e = 0; e < problem.num_elements(); ++e) {
    Eigen::Vector3d ve;
    for (int a = 0; a < 3; ++a) ve(a) = v(problem.mesh.elements(e, a));
    const Eigen::Vector3d local = f.modulus(e) * (problem.element_stiffness[e] * ve);
    for (int a = 0; a < 3; ++a) {
      const int node = problem.mesh.elements(e, a);
      out.row(node) += local(a) * scaled.row(e);
    }
  }
  return out;
}

}  // namespace

Eigen::Matrix3d p1_element_stiffness(const Mesh& mesh, Index e) {
  const double area = mesh.area(e);
  if (!(area > 0.0))
    throw AssemblyError("element " + std::to_string(e) + " has non-positive area");
  Eigen::Matrix<double, 3, 2> grads;
  const auto& el = mesh.elements;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const double xb = mesh.nodes(el(e, b), 0), yb = mesh.nodes(el(e, b), 1);
    const double xc = mesh.nodes(el(e, c), 0), yc = mesh.nodes(el(e, c), 1);
    grads(a, 0) = (yb - yc) / (2.0 * area);
    grads(a, 1) = (xc - xb) / (2.0 * area);
  }
  return area * grads * grads.transpose();
}

FemProblem make_fem_problem(Mesh mesh, KlBasis kl, PointLoad load, double clamp_x,
                            double simp_exponent) {
  require_dims(kl.num_elements() == mesh.num_elements(),
               "KL basis must be evaluated at every element centroid");
  FemProblem p;
  p.mesh = std::move(mesh);
  p.kl = std::move(kl);
  p.simp_exponent = simp_exponent;

  p.element_stiffness.reserve(p.mesh.num_elements());
  for (Index e = 0; e < p.mesh.num_elements(); ++e)
    p.element_stiffness.push_back(p1_element_stiffness(p.mesh, e));

  p.free_index.assign(p.mesh.num_nodes(), 0);
  for (Index k = 0; k < p.mesh.num_nodes(); ++k) {
    if (p.mesh.nodes(k, 0) <= clamp_x) {
      p.dirichlet.push_back(static_cast<int>(k));
      p.free_index[k] = -1;
    }
  }
  if (p.dirichlet.empty()) throw ValidationError("FEM problem has no Dirichlet nodes");
  int next = 0;
  for (auto& idx : p.free_index)
    if (idx >= 0) idx = next++;
  p.num_free = next;

  Index nearest = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < p.mesh.num_nodes(); ++k) {
    const double dx = p.mesh.nodes(k, 0) - load.x, dy = p.mesh.nodes(k, 1) - load.y;
    if (dx * dx + dy * dy < best) {
      best = dx * dx + dy * dy;
      nearest = k;
    }
  }
  p.load = Vector::Zero(p.mesh.num_nodes());
  p.load(nearest) = load.value;
  return p;
}

Matrix fem_assemble(const FemProblem& problem, const Vector& design, const Vector& m) {
  check_inputs(problem, design, m);
  return assemble_with(problem, element_moduli(problem, design, m));
}

Vector fem_solve(const FemProblem& problem, const Vector& design, const Vector& m) {
  return factorize_and_solve(problem, design, m).u;
}

Matrix fem_jacobian(const FemProblem& problem, const Vector& design, const Vector& m) {
  const Factorized f = factorize_and_solve(problem, design, m);
  const Matrix dk_u = stiffness_derivative_times(problem, f, f.u);
  Matrix rhs(problem.num_free, dk_u.cols());
  for (Index i = 0; i < dk_u.cols(); ++i) rhs.col(i) = restrict_free(problem, dk_u.col(i));
  const Matrix sol = f.llt.solve(rhs);
  Matrix jac(problem.num_nodes(), dk_u.cols());
  for (Index i = 0; i < dk_u.cols(); ++i) jac.col(i) = -expand_free(problem, sol.col(i));
  return jac;
}

Vector fem_jacobian_transpose_product(const FemProblem& problem, const Vector& design,
                                      const Vector& m, const Vector& w) {
  require_dims(w.size() == problem.num_nodes(), "adjoint weight must have one entry per node");
  const Factorized f = factorize_and_solve(problem, design, m);
  const Vector adjoint = expand_free(problem, f.llt.solve(restrict_free(problem, w)));
  // (dK/dm_i) is symmetric, so adjoint^T (dK/dm_i) u = sum over elements.
  const Matrix& scaled = problem.kl.scaled_basis();
  Vector out = Vector::Zero(problem.kl.dim());
  for (Index e = 0; e < problem.num_elements(); ++e) {
    Eigen::Vector3d ue, le;
    for (int a = 0; a < 3; ++a) {
      ue(a) = f.u(problem.mesh.elements(e, a));
      le(a) = adjoint(problem.mesh.elements(e, a));
    }
    const double energy = f.modulus(e) * le.dot(problem.element_stiffness[e] * ue);
    out -= energy * scaled.row(e).transpose();
  }
  return out;
}

}  // namespace swvi
