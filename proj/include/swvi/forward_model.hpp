#pragma once

#include "swvi/types.hpp"

namespace swvi {

/// Parameter-to-observable map y = G(x, m) with its sensitivity dG/dm.
///
/// Implementations are immutable after construction; every member is safe to
/// call concurrently for different (x, m).
class ForwardModel {
public:
  virtual ~ForwardModel() = default;

  virtual Index input_dim() const = 0;
  virtual Index latent_dim() const = 0;
  virtual Index output_dim() const = 0;

  virtual Vector evaluate(const Vector& x, const Vector& m) const = 0;

  /// output_dim x latent_dim matrix dG/dm.
  virtual Matrix jacobian(const Vector& x, const Vector& m) const = 0;

  /// J(x, m)^T w. Models with an adjoint route override this so that the
  /// product costs one extra solve instead of latent_dim of them.
  virtual Vector jacobian_transpose_product(const Vector& x, const Vector& m,
                                            const Vector& w) const {
    return jacobian(x, m).transpose() * w;
  }
};

/// Paired inputs and observations; row i of each belongs to sample i.
struct Dataset {
  Matrix inputs;        // n_data x l
  Matrix observations;  // n_data x n

  Index size() const { return inputs.rows(); }
  Vector input(Index i) const { return inputs.row(i).transpose(); }
  Vector observation(Index i) const { return observations.row(i).transpose(); }
};

}  // namespace swvi
