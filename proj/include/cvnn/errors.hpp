#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace cvnn {

/// Base of every error raised by the library. `module()` names the
/// component that raised it so callers can report "module: reason".
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// Dimension or length mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (e.g. log of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or parameter value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A function evaluated by the finite-difference oracle returned a
/// non-finite value.
class OracleEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Derivatives requested from an activation that has none (MVN discrete).
class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

/// Covariance not positive definite even after regularization.
class SingularStatisticsError : public Error {
 public:
  using Error::Error;
};

/// Batch too small to estimate statistics.
class InsufficientBatchError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized model or dataset. `position` is a byte offset
/// for syntax errors or a JSON path for schema errors.
class ParseError : public Error {
 public:
  ParseError(const std::string& position, const std::string& what)
      : Error("serialize", what + " at " + position), position_(position) {}

  const std::string& position() const noexcept { return position_; }

 private:
  std::string position_;
};

}  // namespace cvnn
