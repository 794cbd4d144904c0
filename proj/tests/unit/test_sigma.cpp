#include "doctest.h"

#include "swvi/sigma.hpp"

using namespace swvi;

TEST_CASE("log-spaced grid endpoints") {
  const auto g = log_spaced(1e-3, 1.0, 30);
  CHECK(g.size() == 30);
  CHECK(g.front() == doctest::Approx(1e-3));
  CHECK(g.back() == doctest::Approx(1.0));
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(g[1] / g[0]));
  CHECK_THROWS_AS(log_spaced(0.0, 1.0, 5), ValidationError);
}

TEST_CASE("prior equal to q is the minimizer with near-zero cost") {
  SampleMatrix centers(3, 2);
  centers << 0, 0, 2, 1, -1, 3;
  SigmaOptions opts;
  opts.seed = 1;
  const double target = opts.grid[20];
  const SigmaPrior prior = isotropic_mixture(centers, target);
  const SigmaResult r = optimize_sigma(centers, prior, opts);
  CHECK(r.sigma_star == target);
  CHECK(std::abs(r.cost[20]) <= 1e-12);
  for (double c : r.cost) CHECK(c >= -0.05);
}

TEST_CASE("tight prior at separated centers drives sigma to the grid minimum") {
  SampleMatrix centers(2, 2);
  centers << -10, -10, 10, 10;
  const SigmaPrior prior = isotropic_mixture(centers, 1e-5);
  SigmaOptions opts;
  opts.seed = 2;
  const SigmaResult r = optimize_sigma(centers, prior, opts);
  CHECK(r.sigma_star == opts.grid.front());
  for (std::size_t i = 1; i < r.cost.size(); ++i) CHECK(r.cost[i] > r.cost[i - 1]);
}

TEST_CASE("box prior: a wide Gaussian truncated to a small box is nearly uniform") {
  SampleMatrix centers = SampleMatrix::Zero(1, 2);
  const Box box{Vector::Constant(2, -0.1), Vector::Constant(2, 0.1)};
  // exact value ~0.003; about 6300 of the draws land inside the box
  const double c = complexity_cost(centers, box, 1.0, 1000000, 3);
  CHECK(std::abs(c) <= 0.05);
  CHECK(complexity_cost(centers, box, 1e-3, 20000, 3) > c);
  const Box far{Vector::Constant(2, 50.0), Vector::Constant(2, 51.0)};
  CHECK(std::isinf(complexity_cost(centers, far, 1e-3, 1000, 3)));
}

TEST_CASE("cost is deterministic under a fixed seed") {
  SampleMatrix centers(2, 1);
  centers << 0.0, 1.0;
  const SigmaPrior prior = isotropic_mixture(centers, 0.5);
  CHECK(complexity_cost(centers, prior, 0.1, 1000, 9) == complexity_cost(centers, prior, 0.1, 1000, 9));
}
