#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace rarebasis {

using BigInt = boost::multiprecision::cpp_int;

// Exact binary rational  value = mantissa * 2^(-exponent)  with an
// arbitrary-precision mantissa and a machine-integer exponent.
//
// Canonical form: mantissa is odd or zero; zero carries exponent 0. Every
// constructor and operation re-canonicalizes, so equal values have equal
// representations and operator== is bitwise-meaningful. All arithmetic is
// exact; nothing in this class rounds.
class DyadicScalar {
 public:
  DyadicScalar() : mantissa_(0), exponent_(0) {}
  explicit DyadicScalar(BigInt integer_value)
      : mantissa_(std::move(integer_value)), exponent_(0) {
    canonicalize();
  }
  explicit DyadicScalar(std::int64_t integer_value)
      : DyadicScalar(BigInt(integer_value)) {}
  DyadicScalar(BigInt mantissa, std::int64_t exponent)
      : mantissa_(std::move(mantissa)), exponent_(exponent) {
    canonicalize();
  }

  // 2^log2 (log2 may be negative).
  static DyadicScalar pow2(std::int64_t log2) { return DyadicScalar(BigInt(1), -log2); }
  // count * 2^log2; the common "cells times cell size" shape.
  static DyadicScalar scaled(BigInt count, std::int64_t log2) {
    return DyadicScalar(std::move(count), -log2);
  }

  const BigInt& mantissa() const { return mantissa_; }
  std::int64_t exponent() const { return exponent_; }
  bool is_zero() const { return mantissa_.is_zero(); }
  int sign() const { return mantissa_.sign(); }

  DyadicScalar operator-() const { return DyadicScalar(-mantissa_, exponent_); }
  friend DyadicScalar operator+(const DyadicScalar& a, const DyadicScalar& b);
  friend DyadicScalar operator-(const DyadicScalar& a, const DyadicScalar& b);
  friend DyadicScalar operator*(const DyadicScalar& a, const DyadicScalar& b);
  DyadicScalar& operator+=(const DyadicScalar& b) { return *this = *this + b; }
  DyadicScalar& operator-=(const DyadicScalar& b) { return *this = *this - b; }
  DyadicScalar& operator*=(const DyadicScalar& b) { return *this = *this * b; }

  // Multiplication by 2^log2: exponent arithmetic only, always exact.
  DyadicScalar mul_pow2(std::int64_t log2) const {
    if (is_zero()) return DyadicScalar();
    return DyadicScalar(mantissa_, exponent_ - log2);
  }

  // Exact division; throws ArithmeticError when the quotient is not a
  // binary rational (i.e. when the divisor mantissa does not divide ours).
  DyadicScalar div_exact(const DyadicScalar& divisor) const;

  int compare(const DyadicScalar& other) const;
  std::strong_ordering operator<=>(const DyadicScalar& other) const {
    const int c = compare(other);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  bool operator==(const DyadicScalar& other) const {
    return exponent_ == other.exponent_ && mantissa_ == other.mantissa_;
  }

  bool is_integer() const { return exponent_ <= 0; }
  BigInt to_integer() const;  // throws ArithmeticError unless is_integer()
  BigInt floor_value() const;
  BigInt ceil_value() const;

  // Canonical text form "M" (exponent 0) or "M*2^P" with value M * 2^P.
  std::string str() const;
  static DyadicScalar parse(std::string_view text);  // inverse of str(), also accepts "M*2^P"

  // Lossy, for human-readable output only.
  double to_double() const;

 private:
  void canonicalize();

  BigInt mantissa_;
  std::int64_t exponent_;
};

// Half-open dyadic interval [left, left + 2^length_log2). The right endpoint
// is derived, never stored.
struct DyadicInterval {
  DyadicScalar left;
  std::int64_t length_log2 = 0;

  DyadicScalar right() const { return left + DyadicScalar::pow2(length_log2); }
  DyadicScalar length() const { return DyadicScalar::pow2(length_log2); }
};

}  // namespace rarebasis
