#include "swvi/nnk.hpp"

#include "swvi/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace swvi {

namespace {

struct ForwardPass {
  // activations[l] is the input to layer l (n_l x P); activations[0] holds
  // the |a - b| features. `out_tanh` is tanh(z_L) per pair.
  std::vector<Matrix> activations;
  Eigen::RowVectorXd out_tanh;
};

Matrix pair_features(const KernelNetwork& net, const SampleMatrix& a, const SampleMatrix& b) {
  const Index na = a.rows();
  const Index nb = b.rows();
  const Vector inv = net.feature_scale.cwiseInverse();
  Matrix f(a.cols(), na * nb);
  for (Index i = 0; i < na; ++i)
    for (Index q = 0; q < nb; ++q)
      f.col(i * nb + q) = (a.row(i) - b.row(q)).cwiseAbs().transpose().cwiseProduct(inv);
  return f;
}

ForwardPass run_network(const KernelNetwork& net, Matrix features) {
  ForwardPass fp;
  const std::size_t n_layers = net.weights.size();
  fp.activations.reserve(n_layers);
  fp.activations.push_back(std::move(features));
  for (std::size_t l = 0; l + 1 < n_layers; ++l) {
    Matrix z = net.weights[l] * fp.activations.back();
    z.colwise() += net.biases[l];
    fp.activations.push_back(z.array().tanh().matrix());
  }
  Eigen::RowVectorXd z = net.weights.back() * fp.activations.back();
  z.array() += net.biases.back()(0);
  fp.out_tanh = z.array().tanh().matrix();
  return fp;
}

Matrix kernel_from(const ForwardPass& fp, Index na, Index nb) {
  Matrix k(na, nb);
  for (Index i = 0; i < na; ++i)
    for (Index q = 0; q < nb; ++q) k(i, q) = 0.5 * (1.0 + fp.out_tanh(i * nb + q));
  return k;
}

void check_inputs(const KernelNetwork& net, const SampleMatrix& m) {
  require_dims(m.cols() == net.input_dim(), "sample dimension does not match network input layer");
}

}  // namespace

Index KernelNetwork::num_network_parameters() const {
  Index p = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) p += weights[l].size() + biases[l].size();
  return p;
}

Vector KernelNetwork::parameters() const {
  Vector theta(num_parameters());
  Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const Matrix& w = weights[l];
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) theta(off++) = w(r, c);
    theta.segment(off, biases[l].size()) = biases[l];
    off += biases[l].size();
  }
  for (Index q = 0; q < alpha.rows(); ++q)
    for (Index j = 0; j < alpha.cols(); ++j) theta(off++) = alpha(q, j);
  return theta;
}

void KernelNetwork::set_parameters(const Vector& theta) {
  require_dims(theta.size() == num_parameters(), "parameter vector has wrong length");
  Index off = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix& w = weights[l];
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = theta(off++);
    biases[l] = theta.segment(off, biases[l].size());
    off += biases[l].size();
  }
  for (Index q = 0; q < alpha.rows(); ++q)
    for (Index j = 0; j < alpha.cols(); ++j) alpha(q, j) = theta(off++);
}

void KernelNetwork::validate() const {
  if (layer_sizes.size() < 2) throw ValidationError("network needs at least an input and an output layer");
  if (layer_sizes.back() != 1) throw ValidationError("network output layer must have exactly 1 unit");
  for (int s : layer_sizes)
    if (s < 1) throw ValidationError("network layer sizes must be positive");
  if (weights.size() != layer_sizes.size() - 1 || biases.size() != weights.size())
    throw ValidationError("network weights do not match layer sizes");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_sizes[l + 1] || weights[l].cols() != layer_sizes[l] ||
        biases[l].size() != layer_sizes[l + 1])
      throw ValidationError("network layer " + std::to_string(l) + " has inconsistent shape");
  }
  if (anchors.cols() != layer_sizes.front())
    throw ValidationError("anchor dimension does not match network input layer");
  if (alpha.rows() != anchors.rows()) throw ValidationError("alpha rows must equal anchor count");
  if (feature_scale.size() != layer_sizes.front())
    throw ValidationError("feature scale dimension does not match network input layer");
  if (!(feature_scale.array() > 0.0).all() || !feature_scale.allFinite())
    throw ValidationError("feature scale entries must be positive");
}

namespace {

KernelNetwork random_weights(const std::vector<int>& layer_sizes, Index n_anchors,
                             Index output_dim, Rng& rng) {
  if (n_anchors < 1) throw ValidationError("need at least one anchor");
  if (output_dim < 1) throw ValidationError("output dimension must be positive");
  KernelNetwork net;
  net.layer_sizes = layer_sizes;
  if (layer_sizes.size() < 2 || layer_sizes.back() != 1)
    throw ValidationError("network output layer must have exactly 1 unit");
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const double s = 1.0 / std::sqrt(static_cast<double>(layer_sizes[l]));
    std::uniform_real_distribution<double> unif(-s, s);
    Matrix w(layer_sizes[l + 1], layer_sizes[l]);
    for (Index r = 0; r < w.rows(); ++r)
      for (Index c = 0; c < w.cols(); ++c) w(r, c) = unif(rng);
    Vector b(layer_sizes[l + 1]);
    for (Index r = 0; r < b.size(); ++r) b(r) = unif(rng);
    net.weights.push_back(std::move(w));
    net.biases.push_back(std::move(b));
  }
  std::uniform_real_distribution<double> small(-0.1, 0.1);
  net.alpha.resize(n_anchors, output_dim);
  for (Index q = 0; q < n_anchors; ++q)
    for (Index j = 0; j < output_dim; ++j) net.alpha(q, j) = small(rng);
  return net;
}

}  // namespace

KernelNetwork init_network(const std::vector<int>& layer_sizes, Index n_anchors,
                           Index output_dim, const Box& anchor_box, Rng& rng) {
  KernelNetwork net = random_weights(layer_sizes, n_anchors, output_dim, rng);
  require_dims(anchor_box.lower.size() == layer_sizes.front(), "anchor box dimension mismatch");
  net.anchors = scale_to_box(uniform_unit(rng, n_anchors, layer_sizes.front()), anchor_box);
  net.feature_scale = anchor_box.range();
  for (Index j = 0; j < net.feature_scale.size(); ++j)
    if (!(net.feature_scale(j) > 0.0)) net.feature_scale(j) = 1.0;
  net.validate();
  return net;
}

KernelNetwork init_network(const std::vector<int>& layer_sizes, SampleMatrix anchors,
                           Index output_dim, const Vector& feature_scale, Rng& rng) {
  KernelNetwork net = random_weights(layer_sizes, anchors.rows(), output_dim, rng);
  net.anchors = std::move(anchors);
  net.feature_scale = feature_scale;
  net.validate();
  return net;
}

SampleMatrix pick_anchor_rows(const SampleMatrix& inputs, Index n, Rng& rng) {
  if (n < 1 || n > inputs.rows())
    throw ValidationError("anchor count must be between 1 and the number of training rows");
  std::vector<Index> idx(static_cast<std::size_t>(inputs.rows()));
  for (Index i = 0; i < inputs.rows(); ++i) idx[static_cast<std::size_t>(i)] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(static_cast<std::size_t>(n));
  std::sort(idx.begin(), idx.end());
  SampleMatrix out(n, inputs.cols());
  for (Index q = 0; q < n; ++q) out.row(q) = inputs.row(idx[static_cast<std::size_t>(q)]);
  return out;
}

Matrix kernel_forward(const KernelNetwork& net, const SampleMatrix& a, const SampleMatrix& b) {
  check_inputs(net, a);
  check_inputs(net, b);
  return kernel_from(run_network(net, pair_features(net, a, b)), a.rows(), b.rows());
}

SampleMatrix predict(const KernelNetwork& net, const SampleMatrix& m) {
  return kernel_forward(net, m, net.anchors) * net.alpha;
}

Vector residual(const KernelNetwork& net, const SampleMatrix& inputs, const SampleMatrix& targets) {
  require_dims(inputs.rows() == targets.rows(), "inputs and targets differ in row count");
  require_dims(targets.cols() == net.output_dim(), "targets do not match alpha columns");
  const Matrix diff = predict(net, inputs) - targets;
  Vector r(diff.size());
  for (Index a = 0; a < diff.rows(); ++a)
    for (Index j = 0; j < diff.cols(); ++j) r(a * diff.cols() + j) = diff(a, j);
  return r;
}

ResidualJacobian residual_and_jacobian(const KernelNetwork& net, const SampleMatrix& inputs,
                                       const SampleMatrix& targets) {
  check_inputs(net, inputs);
  require_dims(inputs.rows() == targets.rows(), "inputs and targets differ in row count");
  require_dims(targets.cols() == net.output_dim(), "targets do not match alpha columns");
  const Index n = inputs.rows();
  const Index n_anchor = net.num_anchors();
  const Index d_out = net.output_dim();
  const std::size_t n_layers = net.weights.size();

  const ForwardPass fp = run_network(net, pair_features(net, inputs, net.anchors));
  const Matrix k = kernel_from(fp, n, n_anchor);
  const Matrix pred = k * net.alpha;

  ResidualJacobian out;
  out.residual.resize(n * d_out);
  for (Index a = 0; a < n; ++a)
    for (Index j = 0; j < d_out; ++j) out.residual(a * d_out + j) = pred(a, j) - targets(a, j);

  out.jacobian = Matrix::Zero(n * d_out, net.num_parameters());
  std::vector<Index> offsets(n_layers);
  Index off = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = off;
    off += net.weights[l].size() + net.biases[l].size();
  }
  const Index alpha_offset = off;

  const Eigen::RowVectorXd dk_dz = 0.5 * (1.0 - fp.out_tanh.array().square());
  const Index n_pairs = n * n_anchor;
  for (Index j = 0; j < d_out; ++j) {
    Matrix delta(1, n_pairs);
    for (Index a = 0; a < n; ++a)
      for (Index q = 0; q < n_anchor; ++q)
        delta(0, a * n_anchor + q) = net.alpha(q, j) * dk_dz(a * n_anchor + q);

    for (std::size_t l = n_layers; l-- > 0;) {
      const Matrix& h = fp.activations[l];
      const Index n_out = net.weights[l].rows();
      const Index n_in = net.weights[l].cols();
      for (Index a = 0; a < n; ++a) {
        const auto d_blk = delta.middleCols(a * n_anchor, n_anchor);
        const Matrix gw = d_blk * h.middleCols(a * n_anchor, n_anchor).transpose();
        const Vector gb = d_blk.rowwise().sum();
        auto row = out.jacobian.row(a * d_out + j);
        Index c = offsets[l];
        for (Index r = 0; r < n_out; ++r)
          for (Index s = 0; s < n_in; ++s) row(c++) = gw(r, s);
        for (Index r = 0; r < n_out; ++r) row(c++) = gb(r);
      }
      if (l > 0) {
        Matrix back = net.weights[l].transpose() * delta;
        delta = back.array() * (1.0 - h.array().square());
      }
    }
    for (Index a = 0; a < n; ++a)
      for (Index q = 0; q < n_anchor; ++q)
        out.jacobian(a * d_out + j, alpha_offset + q * d_out + j) = k(a, q);
  }
  return out;
}

Trainer parse_trainer(const std::string& name) {
  if (name == "nr" || name == "newton") return Trainer::NewtonRaphson;
  if (name == "gd" || name == "gradient_descent") return Trainer::GradientDescent;
  throw ValidationError("unknown trainer '" + name + "' (expected nr or gd)");
}

std::string to_string(Trainer t) { return t == Trainer::NewtonRaphson ? "nr" : "gd"; }

TrainingOptions TrainingOptions::gradient_descent() {
  TrainingOptions o;
  o.trainer = Trainer::GradientDescent;
  o.learning_rate = 5e-4;
  o.max_iter = 10000;
  return o;
}

void TrainingOptions::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("train.beta must be positive");
  if (!(residual_tol > 0.0)) throw ValidationError("train.residual_tol must be positive");
  if (max_iter < 1) throw ValidationError("train.max_iter must be at least 1");
}

TrainingResult train(KernelNetwork& net, const SampleMatrix& inputs, const SampleMatrix& targets,
                     const TrainingOptions& opts) {
  opts.validate();
  net.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainingResult result;
  Vector theta = net.parameters();
  for (;;) {
    const ResidualJacobian rj = residual_and_jacobian(net, inputs, targets);
    const double norm = rj.residual.norm();
    result.final_residual = norm;
    if (norm <= opts.residual_tol) {
      result.converged = true;
      break;
    }
    if (result.iterations >= opts.max_iter) break;
    result.history.push_back(norm);
    if (opts.trainer == Trainer::NewtonRaphson)
      theta -= opts.learning_rate * newton_step(rj.jacobian, rj.residual, opts.tikhonov(norm));
    else
      theta -= opts.learning_rate * 2.0 * (rj.jacobian.transpose() * rj.residual);
    net.set_parameters(theta);
    ++result.iterations;
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SampleMatrix augment_prior(const SampleMatrix& m0, int n_per, double sigma, Rng& rng) {
  if (n_per < 1) throw ValidationError("augmentation count must be at least 1");
  if (!(sigma >= 0.0)) throw ValidationError("augmentation sigma must be nonnegative");
  SampleMatrix out(m0.rows() * n_per, m0.cols());
  for (Index i = 0; i < m0.rows(); ++i)
    for (int k = 0; k < n_per; ++k)
      out.row(i * n_per + k) = m0.row(i) + sigma * standard_normal(rng, m0.cols()).transpose();
  return out;
}

void save_network(const KernelNetwork& net, const TrainingResult* history,
                  const std::filesystem::path& path) {
  nlohmann::json j;
  j["layer_sizes"] = net.layer_sizes;
  j["output_dim"] = net.output_dim();
  const Vector theta = net.parameters();
  j["parameters"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  j["anchors"] = matrix_to_json(net.anchors);
  j["feature_scale"] = vector_to_json(net.feature_scale);
  if (history) {
    j["history"] = history->history;
    j["final_residual"] = history->final_residual;
    j["iterations"] = history->iterations;
    j["converged"] = history->converged;
  }
  write_json(path, j);
}

KernelNetwork load_network(const std::filesystem::path& path) {
  const nlohmann::json j = read_json(path);
  KernelNetwork net;
  net.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (net.layer_sizes.size() < 2) throw ValidationError("checkpoint has too few layers");
  for (std::size_t l = 0; l + 1 < net.layer_sizes.size(); ++l) {
    net.weights.emplace_back(net.layer_sizes[l + 1], net.layer_sizes[l]);
    net.biases.emplace_back(net.layer_sizes[l + 1]);
  }
  net.anchors = json_to_matrix(j.at("anchors"));
  net.alpha.resize(net.anchors.rows(), j.at("output_dim").get<Index>());
  net.feature_scale = j.contains("feature_scale") ? json_to_vector(j.at("feature_scale"))
                                                  : Vector::Ones(net.layer_sizes.front());
  const auto theta = j.at("parameters").get<std::vector<double>>();
  net.set_parameters(Eigen::Map<const Vector>(theta.data(), static_cast<Index>(theta.size())));
  net.validate();
  return net;
}

}  // namespace swvi
