#pragma once

#include "swvi/inversion.hpp"
#include "swvi/permutation.hpp"
#include "swvi/rng.hpp"

#include <filesystem>
#include <vector>

namespace swvi {

/// Neural net kernel k(a, b) = (1 + tanh(z_L)) / 2 where z_L is a tanh
/// network applied to the features |a_j - b_j| / s_j. Predictions take the form
/// k(M, anchors) * alpha.
///
/// Flattened parameter order: for each layer, W row-major then b; after the
/// last layer, alpha row-major (entry (q, j) at offset q * d + j). Anchors are
/// not parameters.
struct KernelNetwork {
  std::vector<int> layer_sizes;  // [d, n_1, ..., 1]
  std::vector<Matrix> weights;   // weights[l] is n_{l+1} x n_l
  std::vector<Vector> biases;
  Matrix alpha;                  // n_anchor x d_out
  SampleMatrix anchors;          // n_anchor x d
  Vector feature_scale;          // s_j > 0, fixed during training

  Index input_dim() const { return layer_sizes.front(); }
  Index output_dim() const { return alpha.cols(); }
  Index num_anchors() const { return anchors.rows(); }
  Index num_network_parameters() const;
  Index num_parameters() const { return num_network_parameters() + alpha.size(); }

  Vector parameters() const;
  void set_parameters(const Vector& theta);

  void validate() const;
};

/// W and b ~ U[-1/sqrt(fan_in), 1/sqrt(fan_in)], alpha ~ U[-0.1, 0.1],
/// anchors uniform over `anchor_box`, feature_scale = box range. alpha has
/// `output_dim` columns.
KernelNetwork init_network(const std::vector<int>& layer_sizes, Index n_anchors,
                           Index output_dim, const Box& anchor_box, Rng& rng);

/// Same weight and alpha draws, with given anchors and feature scale.
KernelNetwork init_network(const std::vector<int>& layer_sizes, SampleMatrix anchors,
                           Index output_dim, const Vector& feature_scale, Rng& rng);

/// `n` distinct rows of `inputs` chosen uniformly at random, in row order.
SampleMatrix pick_anchor_rows(const SampleMatrix& inputs, Index n, Rng& rng);

/// n_a x n_b matrix of k(a_i, b_j).
Matrix kernel_forward(const KernelNetwork& net, const SampleMatrix& a, const SampleMatrix& b);

/// kernel_forward(net, m, net.anchors) * net.alpha.
SampleMatrix predict(const KernelNetwork& net, const SampleMatrix& m);

struct ResidualJacobian {
  Vector residual;  // entry a * d_out + j = predict(a, j) - target(a, j)
  Matrix jacobian;  // d residual / d theta in flattened parameter order
};

ResidualJacobian residual_and_jacobian(const KernelNetwork& net, const SampleMatrix& inputs,
                                       const SampleMatrix& targets);

Vector residual(const KernelNetwork& net, const SampleMatrix& inputs, const SampleMatrix& targets);

enum class Trainer { NewtonRaphson, GradientDescent };

Trainer parse_trainer(const std::string& name);
std::string to_string(Trainer t);

struct TrainingOptions {
  Trainer trainer = Trainer::NewtonRaphson;
  double learning_rate = 5e-3;
  TikhonovSchedule tikhonov;
  double residual_tol = 1e-3;
  int max_iter = 2000;

  static TrainingOptions gradient_descent();  // beta 5e-4, 10000 iterations
  void validate() const;
};

struct TrainingResult {
  std::vector<double> history;  // |R| before each update
  double final_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0.0;
};

/// Fits the network parameters (not the anchors) so that predict(inputs)
/// matches targets. NR: theta -= beta (J^T J + delta I)^{-1} J^T R.
/// GD: theta -= beta * 2 J^T R.
TrainingResult train(KernelNetwork& net, const SampleMatrix& inputs, const SampleMatrix& targets,
                     const TrainingOptions& opts);

/// Each row repeated `n_per` times (row i * n_per + k) with sigma * N(0, 1)
/// jitter on every entry.
SampleMatrix augment_prior(const SampleMatrix& m0, int n_per, double sigma, Rng& rng);

void save_network(const KernelNetwork& net, const TrainingResult* history,
                  const std::filesystem::path& path);
KernelNetwork load_network(const std::filesystem::path& path);

}  // namespace swvi
