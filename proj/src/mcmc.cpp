#include "swvi/mcmc.hpp"

#include "swvi/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace swvi {

double distance_neg_loglik(const Vector& m, const SampleMatrix& samples, Index n_lkl,
                           const Matrix& weight) {
  require_dims(m.size() == samples.cols(), "point and samples differ in dimension");
  require_dims(weight.rows() == m.size() && weight.cols() == m.size(), "weight has wrong shape");
  if (n_lkl < 1 || n_lkl > samples.rows())
    throw ValidationError("n_lkl must lie between 1 and the number of samples");
  std::vector<double> r(static_cast<std::size_t>(samples.rows()));
  for (Index i = 0; i < samples.rows(); ++i) {
    const Vector diff = m - samples.row(i).transpose();
    r[i] = diff.dot(weight * diff);
  }
  std::partial_sort(r.begin(), r.begin() + n_lkl, r.end());
  double sum = 0.0;
  for (Index i = 0; i < n_lkl; ++i) sum += r[i];
  return sum;
}

double standard_neg_loglik(const ForwardModel& model, const Vector& m, const Dataset& data,
                           const Matrix& noise_cov) {
  Eigen::LLT<Matrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) throw ValidationError("noise covariance is not SPD");
  double sum = 0.0;
  for (Index j = 0; j < data.size(); ++j) {
    const Vector r = data.observation(j) - model.evaluate(data.input(j), m);
    sum += r.dot(llt.solve(r));
  }
  return sum;
}

std::pair<double, Vector> standard_neg_loglik_and_grad(const ForwardModel& model, const Vector& m,
                                                       const Dataset& data,
                                                       const Matrix& noise_cov) {
  Eigen::LLT<Matrix> llt(noise_cov);
  if (llt.info() != Eigen::Success) throw ValidationError("noise covariance is not SPD");
  double sum = 0.0;
  Vector grad = Vector::Zero(m.size());
  for (Index j = 0; j < data.size(); ++j) {
    const Vector x = data.input(j);
    const Vector r = data.observation(j) - model.evaluate(x, m);
    const Vector w = llt.solve(r);
    sum += r.dot(w);
    grad -= 2.0 * model.jacobian_transpose_product(x, m, w);
  }
  return {sum, grad};
}

namespace {

void append_row(SampleMatrix& mat, Index& used, const Vector& v) {
  if (used == mat.rows()) mat.conservativeResize(std::max<Index>(16, 2 * mat.rows()), Eigen::NoChange);
  mat.row(used++) = v.transpose();
}

}  // namespace

ChainState mh_sample(const LogDensity& log_target, const Vector& m_init, const Matrix& proposal_cov,
                     Index n_steps, Rng& rng) {
  const Index d = m_init.size();
  require_dims(proposal_cov.rows() == d && proposal_cov.cols() == d, "proposal covariance shape");
  Eigen::LLT<Matrix> llt(proposal_cov);
  if (llt.info() != Eigen::Success) throw ValidationError("proposal covariance is not SPD");
  const Matrix chol = llt.matrixL();

  ChainState chain;
  chain.method = "mh";
  chain.proposal_cov = proposal_cov;
  chain.trace.resize(n_steps, d);
  chain.samples.resize(0, d);
  Index used = 0;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector m = m_init;
  double logp = log_target(m);
  for (Index step = 0; step < n_steps; ++step) {
    const Vector cand = m + chol * standard_normal(rng, d);
    double logp_cand = -std::numeric_limits<double>::infinity();
    try {
      logp_cand = log_target(cand);
    } catch (const Error&) {
    }
    ++chain.proposals;
    const double u = unif(rng);
    if (std::isfinite(logp_cand) && std::log(u) < logp_cand - logp) {
      m = cand;
      logp = logp_cand;
      ++chain.accept_count;
      append_row(chain.samples, used, m);
    }
    chain.trace.row(step) = m.transpose();
  }
  chain.samples.conservativeResize(used, Eigen::NoChange);
  return chain;
}

ChainState hmc_sample(const LogDensityAndGradient& log_target, const Vector& m_init,
                      double step_size, int leapfrog_steps, Index n_steps, Rng& rng,
                      double divergence_threshold) {
  if (!(step_size > 0.0)) throw ValidationError("hmc step size must be positive");
  if (leapfrog_steps < 1) throw ValidationError("hmc needs at least one leapfrog step");
  const Index d = m_init.size();
  ChainState chain;
  chain.method = "hmc";
  chain.step_size = step_size;
  chain.leapfrog_steps = leapfrog_steps;
  chain.trace.resize(n_steps, d);
  chain.samples.resize(0, d);
  Index used = 0;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector m = m_init;
  auto [logp, grad] = log_target(m);
  for (Index step = 0; step < n_steps; ++step) {
    const Vector p0 = standard_normal(rng, d);
    Vector q = m;
    Vector p = p0;
    double logp_new = logp;
    Vector grad_new = grad;
    bool finite = true;
    try {
      p += 0.5 * step_size * grad_new;
      for (int l = 0; l < leapfrog_steps; ++l) {
        q += step_size * p;
        std::tie(logp_new, grad_new) = log_target(q);
        if (!std::isfinite(logp_new) || !grad_new.allFinite()) {
          finite = false;
          break;
        }
        p += (l + 1 == leapfrog_steps ? 0.5 : 1.0) * step_size * grad_new;
      }
    } catch (const Error&) {
      finite = false;
    }
    ++chain.proposals;
    const double h0 = -logp + 0.5 * p0.squaredNorm();
    const double h1 = finite ? -logp_new + 0.5 * p.squaredNorm()
                             : std::numeric_limits<double>::infinity();
    const double dh = h1 - h0;
    const double u = unif(rng);
    if (!std::isfinite(dh) || std::abs(dh) > divergence_threshold) {
      ++chain.divergences;
    } else {
      chain.energy_errors.push_back(std::abs(dh));
      if (std::log(u) < -dh) {
        m = q;
        logp = logp_new;
        grad = grad_new;
        ++chain.accept_count;
        append_row(chain.samples, used, m);
      }
    }
    chain.trace.row(step) = m.transpose();
  }
  chain.samples.conservativeResize(used, Eigen::NoChange);
  return chain;
}

void write_chain(const ChainState& chain, const std::filesystem::path& csv_path) {
  write_csv(csv_path, chain.samples, column_names("m", chain.samples.cols()));
  nlohmann::json meta;
  meta["method"] = chain.method;
  meta["proposals"] = chain.proposals;
  meta["accepted"] = chain.accept_count;
  meta["rejected"] = chain.proposals - chain.accept_count;
  meta["acceptance_rate"] = chain.acceptance_rate();
  meta["divergences"] = chain.divergences;
  meta["seed"] = chain.seed;
  if (chain.method == "hmc") {
    meta["step_size"] = chain.step_size;
    meta["leapfrog_steps"] = chain.leapfrog_steps;
  } else {
    meta["proposal_cov"] = matrix_to_json(chain.proposal_cov);
  }
  auto meta_path = csv_path;
  meta_path.replace_extension(".json");
  write_json(meta_path, meta);
}

}  // namespace swvi
