#include "swvi/map_estimate.hpp"

#include <cmath>
#include <limits>
#include <tuple>

namespace swvi {

BfgsResult bfgs_minimize(const ValueAndGradient& fg, const Vector& x0, const BfgsOptions& opts) {
  const Index d = x0.size();
  BfgsResult res;
  res.x = x0;
  auto [f, g] = fg(res.x);
  Matrix h = Matrix::Identity(d, d);

  while (res.iterations < opts.max_iter) {
    if (g.lpNorm<Eigen::Infinity>() <= opts.gtol) {
      res.converged = true;
      break;
    }
    Vector p = -h * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      h.setIdentity();
      p = -g;
      slope = -g.squaredNorm();
    }
    double step = 1.0;
    Vector x_new;
    double f_new = 0.0;
    Vector g_new;
    bool accepted = false;
    for (int k = 0; k < opts.max_backtracks; ++k) {
      x_new = res.x + step * p;
      try {
        std::tie(f_new, g_new) = fg(x_new);
      } catch (const Error&) {
        f_new = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(f_new) && f_new <= f + opts.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    const Vector s = x_new - res.x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 0.0) {
      if (res.iterations == 0) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Matrix left = Matrix::Identity(d, d) - rho * s * y.transpose();
      h = left * h * left.transpose() + rho * s * s.transpose();
    }
    res.x = x_new;
    f = f_new;
    g = g_new;
    ++res.iterations;
  }
  if (!res.converged && g.lpNorm<Eigen::Infinity>() <= opts.gtol) res.converged = true;
  res.value = f;
  res.gradient = g;
  res.inverse_hessian = 0.5 * (h + h.transpose());
  return res;
}

MapResult map_estimate(const ForwardModel& model, const Dataset& data,
                       const GaussianSetting& setting, const BfgsOptions& opts) {
  const auto fg = [&](const Vector& m) {
    return std::make_pair(map_objective(model, data, m, setting),
                          map_scalar_gradient(model, data, m, setting));
  };
  const BfgsResult b = bfgs_minimize(fg, setting.prior_mean, opts);
  MapResult out;
  out.m_map = b.x;
  out.converged = b.converged;
  out.iterations = b.iterations;
  out.objective = b.value;
  Eigen::LLT<Matrix> llt(b.inverse_hessian);
  if (llt.info() == Eigen::Success && b.inverse_hessian.allFinite()) {
    out.sigma1 = b.inverse_hessian;
  } else {
    out.sigma1 = setting.prior_cov;
    out.fallback = true;
  }
  return out;
}

MapMixture map_posterior_mixture(const ForwardModel& model, const Dataset& data,
                                 const SampleMatrix& prior_points, const Matrix& noise_cov,
                                 const Matrix& prior_cov, const BfgsOptions& opts) {
  const Index n = prior_points.rows();
  if (n < 1) throw ValidationError("MAP mixture needs at least one prior point");
  MapMixture out;
  out.starts.resize(static_cast<std::size_t>(n));
  out.kept.assign(static_cast<std::size_t>(n), false);
  std::vector<char> ok(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    try {
      GaussianSetting s{noise_cov, prior_cov, prior_points.row(i).transpose()};
      out.starts[i] = map_estimate(model, data, s, opts);
      ok[i] = out.starts[i].m_map.allFinite() ? 1 : 0;
    } catch (const Error&) {
      ok[i] = 0;
    }
  }
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (Index i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    out.kept[i] = true;
    means.push_back(out.starts[i].m_map);
    covs.push_back(out.starts[i].sigma1);
  }
  if (means.empty()) throw Error("every MAP start failed");
  out.mixture = GaussianMixture::uniform(std::move(means), std::move(covs));
  return out;
}

SampleMatrix gaussian_coverage_points(Index d, Index n) {
  if (d < 1 || n < 1) throw ValidationError("coverage set needs d >= 1 and n >= 1");
  SampleMatrix pts(n, d);
  pts.setZero();
  Index row = 1;
  for (int s = 1; row < n; ++s) {
    for (Index i = 0; i < d && row < n; ++i) {
      for (int sign : {1, -1}) {
        if (row >= n) break;
        pts(row, i) = sign * s;
        ++row;
      }
    }
    if (d == 1) continue;
    for (Index i = 0; i < d && row < n; ++i) {
      Vector dir = Vector::Zero(d);
      if (d == 2) {
        dir << 1.0, (i == 0 ? 1.0 : -1.0);
      } else {
        dir(i) = 1.0;
        dir((i + 1) % d) = 1.0;
      }
      for (int sign : {1, -1}) {
        if (row >= n) break;
        pts.row(row) = (sign * s) * dir.transpose();
        ++row;
      }
    }
  }
  return pts;
}

}  // namespace swvi
