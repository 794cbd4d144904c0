#pragma once

#include "swvi/types.hpp"

#include <functional>

namespace swvi::test {

// Central differences of a vector function, one column per coordinate.
inline Matrix central_difference(const std::function<Vector(const Vector&)>& f, const Vector& x,
                                 double h) {
  const Index n = f(x).size();
  Matrix jac(n, x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    jac.col(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return jac;
}

inline Vector central_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                               double h) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// max over columns of |a_i - b_i| / max(|b_i|, floor)
inline double max_column_rel_error(const Matrix& a, const Matrix& b, double floor = 1e-12) {
  double worst = 0.0;
  for (Index c = 0; c < a.cols(); ++c) {
    const double denom = std::max(b.col(c).norm(), floor);
    worst = std::max(worst, (a.col(c) - b.col(c)).norm() / denom);
  }
  return worst;
}

inline double rel_error(const Matrix& a, const Matrix& b, double floor = 1e-12) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace swvi::test
