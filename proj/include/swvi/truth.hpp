#pragma once

#include "swvi/forward_model.hpp"
#include "swvi/gaussian_mixture.hpp"
#include "swvi/mesh.hpp"

#include <optional>
#include <string>
#include <vector>

namespace swvi {

enum class TruthKind {
  Analytic,   // m = analytic_map(x), x ~ U[0,1]^2
  Unimodal,   // spring, single Gaussian
  Bimodal,    // spring, two Gaussians at +-[2, 2]
  UShape,     // spring, nine Gaussians along a U
  Unimodal6,  // FEM, N([1.1:0.1:1.6], I)
  Bimodal28,  // FEM, 0 and 4*1 with graded diagonal covariances, any d
  Trimodal,   // three Gaussians with graded diagonal covariances, even d
  Mixture,    // explicit mixture from the configuration
};

TruthKind parse_truth_kind(const std::string& name);
std::string to_string(TruthKind k);

struct TruthSpec {
  TruthKind kind = TruthKind::Unimodal;
  Index dim = 0;  // Bimodal28 / Trimodal dimension; 0 selects 28 / 10
  Allocation allocation = Allocation::Stratified;
  std::optional<GaussianMixture> mixture;  // required for Mixture
};

/// m = [sin(8 x1 + 0.1 x2), x1 - 0.1 x2].
Vector analytic_map(const Vector& x);

/// Seeded sampler over latent vectors.
class TruthSampler {
public:
  explicit TruthSampler(TruthSpec spec);

  Index dim() const;
  const TruthSpec& spec() const { return spec_; }
  bool is_analytic() const { return spec_.kind == TruthKind::Analytic; }
  /// Throws for the analytic truth, which is not a mixture.
  const GaussianMixture& mixture() const;

  SampleMatrix sample(Index n, Rng& rng) const;

private:
  TruthSpec spec_;
  GaussianMixture mixture_;
};

TruthSampler make_truth(const TruthSpec& spec);

/// The built-in mixture for `kind` (not Analytic or Mixture).
GaussianMixture builtin_mixture(TruthKind kind, Index dim = 0);

struct SyntheticData {
  Dataset data;
  SampleMatrix latent;  // the m used for row i
};

/// x = center + delta_x * U[-1, 1]^l per row.
Matrix spring_inputs(Index n, double delta_x, Rng& rng, const Vector& center = Vector::Constant(2, 0.5));

/// Draws one latent sample per input row and sets y = G(x, m). Model failures
/// are rethrown with the offending row index.
SyntheticData generate_dataset(const ForwardModel& model, const TruthSampler& truth,
                               const Matrix& inputs, Rng& rng);

/// Spring dataset: n_data inputs around [0.5, 0.5] with scatter delta_x.
SyntheticData generate_spring_dataset(const ForwardModel& model, const TruthSampler& truth,
                                      Index n_data, double delta_x, Rng& rng);

/// Stand-ins for intermediate topology-optimization iterates on `mesh`:
/// field k blends a uniform volume fraction into a fixed pattern of radial
/// bumps with weight k / (n_fields - 1). Values lie in [1e-3, 1].
std::vector<Vector> synthetic_design_fields(const Mesh& mesh, int n_fields, Rng& rng,
                                            double volume_fraction = 0.5, int n_bumps = 4);

/// Picks `n_keep` evenly spaced base fields and adds `n_noise_per` jittered
/// copies of each: min(1, max(1e-3, x + jitter N(0, 1))). Rows are design
/// vectors, field-major.
Matrix generate_design_inputs(const std::vector<Vector>& base_fields, int n_keep, int n_noise_per,
                              Rng& rng, double jitter = 0.01);

}  // namespace swvi
