#pragma once

#include "swvi/fem.hpp"
#include "swvi/inversion.hpp"
#include "swvi/map_estimate.hpp"
#include "swvi/nnk.hpp"
#include "swvi/spring.hpp"
#include "swvi/truth.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swvi {

enum class ModelType { Spring, Fem };

struct FemConfig {
  int nx = 20;
  int ny = 20;
  std::optional<CircularHole> hole;
  int kl_dim = 6;
  bool transform = true;
  double correlation_length = 1.0;
  double simp_exponent = 1.0;
  PointLoad load;
};

struct ModelConfig {
  ModelType type = ModelType::Spring;
  StiffnessMap stiffness = StiffnessMap::Exp;
  FemConfig fem;
};

struct DesignConfig {
  int n_fields = 20;       // synthetic base fields
  int n_keep = 20;
  int n_noise_per = 10;
  double jitter = 0.01;
  double volume_fraction = 0.5;
  int n_bumps = 4;
};

struct DataConfig {
  Index n_data = 200;
  double delta_x = 0.005;
  Vector center = Vector::Constant(2, 0.5);
  DesignConfig design;
};

struct NoiseStudyConfig {
  std::vector<double> levels;  // empty disables the study
  int n_per_sample = 100;
  Index n_select = 200;
  double residual_tol = 1e-2;
};

struct InversionConfig {
  InversionOptions options;
  bool keep_unconverged = true;  // false: m_opt.csv holds converged rows only
  NoiseStudyConfig noise;
};

struct PermutationConfig {
  bool enabled = true;
  bool ablation = false;  // also train on the unpermuted prior
};

enum class AnchorPlacement {
  Box,       // uniform over the prior box
  Training,  // random subset of the training inputs
};

struct NnkConfig {
  std::vector<int> layers;  // empty: [d, 10, 4, 1]
  Index n_anchors = 20;
  AnchorPlacement anchors = AnchorPlacement::Box;
  TrainingOptions training;
  std::vector<Trainer> compare;  // analytic runs: trainers to compare
  TrainingOptions gradient_descent = TrainingOptions::gradient_descent();
};

struct PredictConfig {
  Index n_test = 1000;
  int augment_per = 5;
  double augment_sigma = 0.002;
};

struct EvaluationConfig {
  std::vector<Vector> x_eval;  // spring inputs for push-forward statistics
  Index n_mc = 1000;           // Monte-Carlo truth size for output statistics
  Index n_reference = 100000;  // latent reference size when no exact moments exist
  double mode_radius = 1.0;
};

struct MapConfig {
  bool enabled = false;
  Index n_dq = 17;
  double noise_scale = 1.0;  // Gamma_noise = noise_scale * I
  double prior_scale = 1.0;  // Sigma_0 = prior_scale * I
  Index n_samples = 1000;
  BfgsOptions bfgs;
};

enum class LikelihoodKind { Standard, Distance };

struct MhConfig {
  bool enabled = false;
  LikelihoodKind likelihood = LikelihoodKind::Standard;
  double noise_scale = 0.01;
  Index n_lkl = 200;
  double proposal_scale = 0.25;  // proposal covariance = proposal_scale * I
  Index n_steps = 20000;
  Index burn_in = 2000;
  Vector init;  // empty: origin
};

enum class HmcTarget { Truth, Standard };

struct HmcConfig {
  bool enabled = false;
  HmcTarget target = HmcTarget::Truth;
  double noise_scale = 0.01;
  double step_size = 0.05;
  int leapfrog_steps = 20;
  Index n_steps = 5000;
  Index burn_in = 500;
  std::vector<Vector> inits;  // one chain per start; empty: origin
};

struct BaselinesConfig {
  MapConfig map;
  MhConfig mh;
  HmcConfig hmc;
};

struct SigmaConfig {
  bool enabled = false;
  double lo = 1e-3;
  double hi = 1.0;
  int n = 30;
  Index n_mc = 5000;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  ModelConfig model;
  TruthSpec truth;
  DataConfig data;
  InversionConfig inversion;
  PermutationConfig permutation;
  NnkConfig nnk;
  PredictConfig predict;
  EvaluationConfig evaluation;
  BaselinesConfig baselines;
  SigmaConfig sigma;
  nlohmann::json source;  // the parsed document, echoed into the manifest
};

/// Parses and validates; errors are ValidationError messages prefixed with
/// the dotted path of the offending field. Unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

std::unique_ptr<ForwardModel> make_model(const ExperimentConfig& cfg);

/// Network layer sizes with the input layer set to the latent dimension.
std::vector<int> resolved_layers(const ExperimentConfig& cfg);

std::string to_string(ModelType t);
std::string to_string(LikelihoodKind k);
std::string to_string(HmcTarget t);
std::string to_string(AnchorPlacement a);

}  // namespace swvi
