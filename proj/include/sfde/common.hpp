#pragma once

#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sfde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Every stochastic routine takes a caller-owned engine; no global state.
using Rng = std::mt19937_64;

enum class ErrorKind {
  InvalidGeometry,
  InvalidConfig,
  InvalidArgument,
  ShapeMismatch,
  NonConvergence,
  NotPositiveDefinite,
  NumericalInstability,
  Domain,
  Io,
  MissingData,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace sfde
