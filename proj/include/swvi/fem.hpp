#pragma once

#include "swvi/forward_model.hpp"
#include "swvi/kl_field.hpp"
#include "swvi/mesh.hpp"

#include <vector>

namespace swvi {

/// Scalar elliptic problem -div(E grad u) = f on a P1 triangle mesh with the
/// modulus E = rho_e^p exp(log-modulus) piecewise constant per element.
struct FemProblem {
  Mesh mesh;
  std::vector<int> dirichlet;                     // fixed node ids, u = 0
  Vector load;                                    // nodal force vector
  std::vector<Eigen::Matrix3d> element_stiffness; // unit-modulus K_e
  KlBasis kl;
  double simp_exponent = 1.0;

  // derived from `dirichlet`: free-dof index per node, -1 when fixed
  std::vector<int> free_index;
  Index num_free = 0;

  Index num_elements() const { return mesh.num_elements(); }
  Index num_nodes() const { return mesh.num_nodes(); }
};

struct PointLoad {
  double x = 1.0;
  double y = 0.5;
  double value = 1.0;
};

/// Unit-modulus P1 stiffness of triangle e (grad-grad integral).
Eigen::Matrix3d p1_element_stiffness(const Mesh& mesh, Index e);

/// Clamps every node with x <= `clamp_x` and applies the load at the node
/// nearest to `load`.
FemProblem make_fem_problem(Mesh mesh, KlBasis kl, PointLoad load = {}, double clamp_x = 1e-12,
                            double simp_exponent = 1.0);

/// Constrained global stiffness over the free dofs:
/// K = sum_e K_e rho_e^p E(c_e, m). Throws AssemblyError on a non-finite or
/// non-positive element modulus.
Matrix fem_assemble(const FemProblem& problem, const Vector& design, const Vector& m);

/// Full nodal solution (zeros on Dirichlet nodes).
Vector fem_solve(const FemProblem& problem, const Vector& design, const Vector& m);

/// n_nodes x d direct-differentiation Jacobian. All d columns reuse one
/// Cholesky factorization.
Matrix fem_jacobian(const FemProblem& problem, const Vector& design, const Vector& m);

/// Adjoint route for J^T w: component i is -(K^{-1} w)^T (dK/dm_i) u.
Vector fem_jacobian_transpose_product(const FemProblem& problem, const Vector& design,
                                      const Vector& m, const Vector& w);

/// Forward model with x = per-element design densities and y = nodal u.
class FemModel final : public ForwardModel {
public:
  explicit FemModel(FemProblem problem) : problem_(std::move(problem)) {}

  Index input_dim() const override { return problem_.num_elements(); }
  Index latent_dim() const override { return problem_.kl.dim(); }
  Index output_dim() const override { return problem_.num_nodes(); }

  Vector evaluate(const Vector& x, const Vector& m) const override {
    return fem_solve(problem_, x, m);
  }
  Matrix jacobian(const Vector& x, const Vector& m) const override {
    return fem_jacobian(problem_, x, m);
  }
  Vector jacobian_transpose_product(const Vector& x, const Vector& m,
                                    const Vector& w) const override {
    return fem_jacobian_transpose_product(problem_, x, m, w);
  }

  const FemProblem& problem() const { return problem_; }

private:
  FemProblem problem_;
};

}  // namespace swvi
