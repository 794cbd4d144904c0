#pragma once

#include "swvi/forward_model.hpp"
#include "swvi/rng.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace swvi {

/// Sum of the `n_lkl` smallest weighted squared distances d^T W d between
/// `m` and the rows of `samples`. This is -log p for the distance likelihood.
double distance_neg_loglik(const Vector& m, const SampleMatrix& samples, Index n_lkl,
                           const Matrix& weight);

/// sum_j (y_j - G(x_j, m))^T Gamma^{-1} (y_j - G(x_j, m)).
double standard_neg_loglik(const ForwardModel& model, const Vector& m, const Dataset& data,
                           const Matrix& noise_cov);

/// Value and m-gradient of standard_neg_loglik.
std::pair<double, Vector> standard_neg_loglik_and_grad(const ForwardModel& model, const Vector& m,
                                                       const Dataset& data,
                                                       const Matrix& noise_cov);

using LogDensity = std::function<double(const Vector&)>;
using LogDensityAndGradient = std::function<std::pair<double, Vector>(const Vector&)>;

struct ChainState {
  std::string method;
  SampleMatrix samples;        // accepted states, in acceptance order
  SampleMatrix trace;          // chain state after every step
  Index proposals = 0;
  Index accept_count = 0;
  Index divergences = 0;
  std::vector<double> energy_errors;  // |Delta H| per HMC trajectory
  double step_size = 0.0;
  int leapfrog_steps = 0;
  Matrix proposal_cov;
  std::uint64_t seed = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accept_count) / proposals;
  }
};

/// Gaussian random-walk Metropolis-Hastings.
ChainState mh_sample(const LogDensity& log_target, const Vector& m_init, const Matrix& proposal_cov,
                     Index n_steps, Rng& rng);

/// Hamiltonian Monte Carlo with unit mass, `leapfrog_steps` leapfrog steps of
/// size `step_size` per proposal. Trajectories whose energy change exceeds
/// `divergence_threshold` (or is not finite) are rejected and counted.
ChainState hmc_sample(const LogDensityAndGradient& log_target, const Vector& m_init,
                      double step_size, int leapfrog_steps, Index n_steps, Rng& rng,
                      double divergence_threshold = 1000.0);

/// Accepted samples as CSV plus `<stem>.json` with counts and settings.
void write_chain(const ChainState& chain, const std::filesystem::path& csv_path);

}  // namespace swvi
