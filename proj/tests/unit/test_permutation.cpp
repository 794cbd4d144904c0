#include "doctest.h"

#include "swvi/permutation.hpp"

#include <algorithm>
#include <random>

using namespace swvi;

TEST_CASE("scale_prior examples") {
  SampleMatrix opt(2, 1), m0(2, 1);
  opt << 2.0, 0.0;
  m0 << 0.1, 0.9;
  const SampleMatrix s = scale_prior(m0, opt);
  CHECK(s(0, 0) == doctest::Approx(0.2));
  CHECK(s(1, 0) == doctest::Approx(1.8));

  SampleMatrix mid(1, 1);
  mid << 0.5;
  CHECK(scale_prior(mid, opt)(0, 0) == doctest::Approx(1.0));

  SampleMatrix flat(3, 2);
  flat << 1, 4, 2, 4, 3, 4;
  const SampleMatrix u = (SampleMatrix(3, 2) << 0.1, 0.2, 0.5, 0.7, 0.9, 0.3).finished();
  CHECK((scale_prior(u, flat).col(1).array() == 4.0).all());
}

TEST_CASE("permute hand trace and identity pairing") {
  SampleMatrix opt(2, 1), m0(2, 1);
  opt << 2.0, 0.0;
  m0 << 0.1, 0.9;
  const PermutationOutput p = permute(m0, opt);
  CHECK(p.m_tilde(0, 0) == doctest::Approx(1.8));
  CHECK(p.m_tilde(1, 0) == doctest::Approx(0.2));
  CHECK(p.pairing == std::vector<Index>{1, 0});

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SampleMatrix unit(30, 3);
  for (Index i = 0; i < unit.rows(); ++i)
    for (Index j = 0; j < 3; ++j) unit(i, j) = u(rng);
  unit.row(0).setZero();
  unit.row(1).setOnes();
  Box box{Vector::Constant(3, -2.0), Vector::Constant(3, 5.0)};
  const SampleMatrix scaled = scale_to_box(unit, box);
  const PermutationOutput id = permute(unit, scaled);
  for (Index i = 0; i < 30; ++i) CHECK(id.pairing[i] == i);
}

TEST_CASE("pairing is a bijection and m_tilde stays in the box") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 2.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Index rows = 50 + trial;
    SampleMatrix opt(rows, 2), m0(rows, 2);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < 2; ++j) {
        opt(i, j) = n(rng);
        m0(i, j) = u(rng);
      }
    const PermutationOutput p = permute(m0, opt);
    std::vector<Index> sorted = p.pairing;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < rows; ++i) CHECK(sorted[i] == i);
    const Box box = bounding_box(opt);
    for (Index i = 0; i < rows; ++i) CHECK(box.contains(p.m_tilde.row(i).transpose(), 1e-12));
  }
}

TEST_CASE("mismatched shapes are rejected") {
  CHECK_THROWS_AS(permute(SampleMatrix::Zero(3, 2), SampleMatrix::Zero(4, 2)), DimensionError);
  CHECK_THROWS_AS(permute(SampleMatrix::Zero(3, 2), SampleMatrix::Zero(3, 3)), DimensionError);
}
