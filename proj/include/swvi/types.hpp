#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace swvi {

using Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Rows are samples, columns are latent dimensions.
using SampleMatrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class SingularSystemError : public Error {
public:
  using Error::Error;
};

class AssemblyError : public Error {
public:
  using Error::Error;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

inline void require_dims(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace swvi
