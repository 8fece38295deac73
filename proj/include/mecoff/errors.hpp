#pragma once

#include <stdexcept>
#include <string>

namespace mecoff {

/// Inputs violate a feasibility constraint of the offloading problem
/// (local CPU cap, edge compute time exceeding the deadline, ...).
class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A computation produced NaN or otherwise unusable numbers.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Objects handed to an operation do not belong together
/// (e.g. value tables built for a different offload amount).
class ConsistencyError : public std::logic_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::logic_error(what) {}
};

/// Instance exceeds the limits of an enumeration routine.
class SizeError : public std::length_error {
 public:
  explicit SizeError(const std::string& what) : std::length_error(what) {}
};

}  // namespace mecoff
