#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace tracelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-conforming shapes, out-of-range indices, invalid sizes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// The operator lacks an access path (entry reads, subblock extraction, transpose).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// A quadrature node or matrix eigenvalue fell outside the domain of f.
class DomainError : public Error {
 public:
  DomainError(const std::string& what, double min_value)
      : Error(what), min_value_(min_value) {}
  double min_value() const noexcept { return min_value_; }

 private:
  double min_value_;
};

// Factorization failure, rank deficiency that redraws could not cure, singular blocks.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Emits a warning line on stderr unless warnings have been silenced.
void warn(const std::string& message);
void set_warnings_enabled(bool enabled);

}  // namespace tracelab
