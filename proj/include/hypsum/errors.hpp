#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace hypsum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A gamma function (or a Pochhammer symbol used as one) was asked for its
/// value at a non-positive integer.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid series parameters.
class ParamError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An infinite sum over k is requested although a_j <= 0 for some j >= 3.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Truncation of an infinite sum did not reach the requested tolerance.
class TailError : public Error {
 public:
  TailError(std::string sum_name, const std::string& what)
      : Error(sum_name + ": " + what), sum_name_(std::move(sum_name)) {}

  const std::string& sum_name() const noexcept { return sum_name_; }

 private:
  std::string sum_name_;
};

/// An alternative A_k representation hit a vanishing denominator.
class DegenerateRepresentation : public Error {
 public:
  using Error::Error;
};

}  // namespace hypsum
