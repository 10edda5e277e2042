#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sppc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, out-of-range parameter, invalid trace.
/// The CLI maps this family to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure family. The CLI maps it to exit code 3.
class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what, double residual = 0.0)
      : Error(what), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Non-finite values, non-positive pivots and similar arithmetic breakdowns.
class NumericError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Cost design cannot satisfy its own constraints (rho outside [0,1),
/// rank-deficient prediction operator).
class DesignInfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// A packet solver exhausted its support without meeting the budget.
class FeasibilityError : public SolverError {
 public:
  FeasibilityError(const std::string& what, double residual, double budget)
      : SolverError(what, residual), budget_(budget) {}

  double budget() const noexcept { return budget_; }

 private:
  double budget_;
};

/// Actuator buffer used in a way the dropout bound forbids.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Quantizer index outside the representable range.
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed bitstream handed to the packet decoder.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t bit_offset)
      : Error(what + " at bit " + std::to_string(bit_offset)),
        bit_offset_(bit_offset) {}

  std::size_t bit_offset() const noexcept { return bit_offset_; }

 private:
  std::size_t bit_offset_;
};

}  // namespace sppc
