#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pgdfit {

/// Base class of everything the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (dimension mismatch, bad argument).
class ContractViolation : public Error {
public:
  using Error::Error;
};

class SingularSystem : public Error {
public:
  using Error::Error;
};

class InvalidGrid : public Error {
public:
  using Error::Error;
};

class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// A parameter value outside its axis interval; surrogates never extrapolate.
class OutOfRange : public Error {
public:
  using Error::Error;
};

/// Raised when an enrichment step produces a null mode.
class ZeroMode : public Error {
public:
  using Error::Error;
};

/// The reconstructed coefficient vanishes at a collocation point.
class DegenerateCoefficient : public Error {
public:
  using Error::Error;
};

class BudgetExceeded : public Error {
public:
  using Error::Error;
};

class MaxIterations : public Error {
public:
  MaxIterations(const std::string& what, std::vector<double> residual_trace)
      : Error(what), trace_(std::move(residual_trace)) {}

  /// Relative residual after each iteration.
  const std::vector<double>& trace() const noexcept { return trace_; }

private:
  std::vector<double> trace_;
};

inline void require(bool condition, const char* message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace pgdfit
