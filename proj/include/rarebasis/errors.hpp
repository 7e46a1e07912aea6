#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rarebasis {

// Exit codes used by the command line driver. Library code signals through
// the exception types below; the driver maps them onto these codes.
inline constexpr int kExitPass = 0;              // ran, every certificate passed
inline constexpr int kExitCertificateFailed = 1; // ran, at least one certificate failed
inline constexpr int kExitValidation = 2;        // rejected input, nothing certified
inline constexpr int kExitInternal = 3;          // internal invariant violated, aborted

// Rejected input: malformed flags, inadmissible exponent sequences,
// out-of-range requests. Nothing has been computed when this is thrown.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Query outside the domain of a set, interval, or crystal.
class DomainError : public ValidationError {
 public:
  explicit DomainError(const std::string& what) : ValidationError(what) {}
};

// A finite scale set cannot support the requested construction depth.
// Carries the depth that is actually available.
class CapacityError : public ValidationError {
 public:
  CapacityError(const std::string& what, std::int64_t available)
      : ValidationError(what), capacity(available) {}
  std::int64_t capacity;
};

// The dense and symbolic engines disagreed on a certified quantity, or a
// construction-time identity failed. Always fatal; never downgraded to a
// failing certificate.
class EngineDisagreement : public std::logic_error {
 public:
  explicit EngineDisagreement(const std::string& what) : std::logic_error(what) {}
};

// Exact arithmetic was asked for a result it cannot represent (inexact
// division). Indicates a bug in the caller, hence logic_error.
class ArithmeticError : public std::logic_error {
 public:
  explicit ArithmeticError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace rarebasis
