#pragma once

#include "swvi/config.hpp"
#include "swvi/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <memory>
#include <string>

namespace swvi {

/// Raised when a pipeline stage fails; carries the stage name.
class StageError : public Error {
public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

/// Seed for a named stage, derived from the experiment seed.
std::uint64_t stage_seed(std::uint64_t base, const std::string& stage);

/// Git blob hash (SHA-1 of "blob <len>\0<content>") in hex.
std::string git_blob_hash(const std::string& content);

/// Moment errors against exact reference moments (std as standard deviation).
MomentReport moment_errors_exact(const SampleMatrix& samples, const Vector& mean,
                                 const Vector& stddev);

nlohmann::json to_json(const MomentReport& r);

/// Stage runner over one output directory. Every stage reads its inputs from
/// files written by earlier stages, so stages can be run one at a time.
///
/// Files: data.csv, latent_true.csv | m_opt.csv, inversion.json |
/// prior_unit.csv, m_tilde.csv, pairing.csv | nnk.json, training.json |
/// test_uniform.csv, test_augmented.csv, train_prediction.csv |
/// map_*.{csv,json}, mh_chain.*, hmc_chain_<k>.* | sigma.json |
/// noise/level_<k>/*, noise_study.json | analytic*.{csv,json} |
/// metrics.json, manifest.json.
class Pipeline {
public:
  Pipeline(ExperimentConfig cfg, std::filesystem::path out_dir);

  const ExperimentConfig& config() const { return cfg_; }
  const ForwardModel& model() const { return *model_; }
  const std::filesystem::path& out_dir() const { return out_; }

  void generate();
  void invert();
  void permute();
  void train();
  void predict();
  void baseline_map();
  void baseline_mh();
  void baseline_hmc();
  void sigma();
  void noise_study();
  void analytic();

  /// Computes metrics.json from whatever artifacts exist.
  nlohmann::json report();

  /// Runs every configured stage, then report(), then writes manifest.json.
  /// Returns the metrics document.
  nlohmann::json run();

private:
  std::filesystem::path path(const std::string& name) const { return out_ / name; }
  std::uint64_t seed(const std::string& stage) const { return stage_seed(cfg_.seed, stage); }
  Dataset load_dataset() const;
  SampleMatrix load_samples(const std::string& name) const;
  SampleMatrix truth_reference(Index n, const std::string& stream) const;
  Vector eval_input(Index k) const;
  void write_manifest(const nlohmann::json& stages) const;

  ExperimentConfig cfg_;
  std::filesystem::path out_;
  std::unique_ptr<ForwardModel> model_;
  TruthSampler truth_;
};

/// Loads the config, applies overrides and runs the full chain.
nlohmann::json run_experiment(const std::filesystem::path& config_path,
                              const std::filesystem::path& out_dir,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace swvi
