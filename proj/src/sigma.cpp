#include "swvi/sigma.hpp"

#include <cmath>
#include <limits>

namespace swvi {

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw ValidationError("invalid log-spaced grid");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : std::exp(a + (b - a) * i / (n - 1));
  return g;
}

GaussianMixture isotropic_mixture(const SampleMatrix& centers, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  const Matrix cov = sigma * Matrix::Identity(centers.cols(), centers.cols());
  for (Index i = 0; i < centers.rows(); ++i) {
    means.push_back(centers.row(i).transpose());
    covs.push_back(cov);
  }
  return GaussianMixture::uniform(std::move(means), std::move(covs));
}

namespace {

struct BaseDraws {
  std::vector<Index> component;
  Matrix z;  // n_mc x d standard normals
};

BaseDraws base_draws(Index n_centers, Index d, Index n_mc, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<Index> pick(0, n_centers - 1);
  BaseDraws b;
  b.component.resize(static_cast<std::size_t>(n_mc));
  for (auto& c : b.component) c = pick(rng);
  b.z = standard_normal(rng, n_mc, d);
  return b;
}

double cost_from_draws(const SampleMatrix& centers, const SigmaPrior& prior, double sigma,
                       const BaseDraws& draws) {
  const GaussianMixture q = isotropic_mixture(centers, sigma);
  const double scale = std::sqrt(sigma);
  const Index n_mc = draws.z.rows();
  double sum = 0.0;
  Index inside = 0;
  for (Index s = 0; s < n_mc; ++s) {
    const Vector m = centers.row(draws.component[s]).transpose() + scale * draws.z.row(s).transpose();
    if (const auto* box = std::get_if<Box>(&prior)) {
      if (!box->contains(m)) continue;
      sum += q.logpdf(m);
    } else {
      sum += q.logpdf(m) - std::get<GaussianMixture>(prior).logpdf(m);
    }
    ++inside;
  }
  if (const auto* box = std::get_if<Box>(&prior)) {
    if (inside == 0) return std::numeric_limits<double>::infinity();
    const double log_volume = box->range().array().log().sum();
    const double z_in = static_cast<double>(inside) / static_cast<double>(n_mc);
    return sum / static_cast<double>(inside) - std::log(z_in) + log_volume;
  }
  return sum / static_cast<double>(n_mc);
}

void check(const SampleMatrix& centers, const SigmaPrior& prior) {
  if (centers.rows() == 0) throw ValidationError("sigma optimization needs at least one center");
  if (const auto* box = std::get_if<Box>(&prior)) {
    require_dims(box->lower.size() == centers.cols(), "prior box dimension mismatch");
    if (!(box->range().array() > 0.0).all()) throw ValidationError("prior box has zero width");
  } else {
    require_dims(std::get<GaussianMixture>(prior).dim() == centers.cols(),
                 "prior mixture dimension mismatch");
  }
}

}  // namespace

double complexity_cost(const SampleMatrix& centers, const SigmaPrior& prior, double sigma,
                       Index n_mc, std::uint64_t seed) {
  check(centers, prior);
  return cost_from_draws(centers, prior, sigma, base_draws(centers.rows(), centers.cols(), n_mc, seed));
}

SigmaResult optimize_sigma(const SampleMatrix& centers, const SigmaPrior& prior,
                           const SigmaOptions& opts) {
  check(centers, prior);
  if (opts.grid.empty()) throw ValidationError("sigma grid is empty");
  if (opts.n_mc < 1) throw ValidationError("sigma n_mc must be positive");
  const BaseDraws draws = base_draws(centers.rows(), centers.cols(), opts.n_mc, opts.seed);
  SigmaResult res;
  res.grid = opts.grid;
  res.cost.resize(opts.grid.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opts.grid.size(); ++i) {
    if (!(opts.grid[i] > 0.0)) throw ValidationError("sigma grid values must be positive");
    res.cost[i] = cost_from_draws(centers, prior, opts.grid[i], draws);
    if (res.cost[i] < best) {
      best = res.cost[i];
      res.sigma_star = opts.grid[i];
    }
  }
  if (!std::isfinite(best)) res.sigma_star = opts.grid.front();
  return res;
}

}  // namespace swvi
