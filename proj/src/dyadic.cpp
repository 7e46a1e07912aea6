#include "rarebasis/dyadic.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "rarebasis/errors.hpp"

namespace rarebasis {

namespace {

BigInt abs_big(const BigInt& x) { return x < 0 ? BigInt(-x) : x; }

// Position of the most significant set bit of |x|; x must be nonzero.
std::int64_t msb_index(const BigInt& x) {
  return static_cast<std::int64_t>(boost::multiprecision::msb(abs_big(x)));
}

std::int64_t lsb_index(const BigInt& x) {
  return static_cast<std::int64_t>(boost::multiprecision::lsb(abs_big(x)));
}

}  // namespace

void DyadicScalar::canonicalize() {
  if (mantissa_.is_zero()) {
    exponent_ = 0;
    return;
  }
  const std::int64_t tz = lsb_index(mantissa_);
  if (tz > 0) {
    mantissa_ >>= static_cast<unsigned>(tz);
    exponent_ -= tz;
  }
}

DyadicScalar operator+(const DyadicScalar& a, const DyadicScalar& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const std::int64_t e = std::max(a.exponent_, b.exponent_);
  BigInt m = a.mantissa_;
  m <<= static_cast<unsigned>(e - a.exponent_);
  BigInt n = b.mantissa_;
  n <<= static_cast<unsigned>(e - b.exponent_);
  return DyadicScalar(m + n, e);
}

DyadicScalar operator-(const DyadicScalar& a, const DyadicScalar& b) { return a + (-b); }

DyadicScalar operator*(const DyadicScalar& a, const DyadicScalar& b) {
  if (a.is_zero() || b.is_zero()) return DyadicScalar();
  // Odd times odd is odd, so the product is already canonical; the
  // constructor's canonicalize() then only strips zero work.
  return DyadicScalar(a.mantissa_ * b.mantissa_, a.exponent_ + b.exponent_);
}

DyadicScalar DyadicScalar::div_exact(const DyadicScalar& divisor) const {
  if (divisor.is_zero()) throw ArithmeticError("division by zero");
  if (is_zero()) return DyadicScalar();
  BigInt q, r;
  boost::multiprecision::divide_qr(mantissa_, divisor.mantissa_, q, r);
  if (!r.is_zero()) {
    throw ArithmeticError("inexact division: " + str() + " / " + divisor.str());
  }
  return DyadicScalar(std::move(q), exponent_ - divisor.exponent_);
}

int DyadicScalar::compare(const DyadicScalar& other) const {
  const int sa = sign();
  const int sb = other.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  // Same nonzero sign. Compare magnitude orders first so that wildly
  // different exponents never force a large alignment shift.
  const std::int64_t la = msb_index(mantissa_) - exponent_;
  const std::int64_t lb = msb_index(other.mantissa_) - other.exponent_;
  if (la != lb) return ((la < lb) ? -1 : 1) * sa;
  // Equal orders: exponent gap equals the mantissa bit-length gap, so the
  // shift below is bounded by the operand sizes.
  BigInt x = mantissa_;
  BigInt y = other.mantissa_;
  if (exponent_ >= other.exponent_) {
    y <<= static_cast<unsigned>(exponent_ - other.exponent_);
  } else {
    x <<= static_cast<unsigned>(other.exponent_ - exponent_);
  }
  if (x == y) return 0;
  return x < y ? -1 : 1;
}

BigInt DyadicScalar::to_integer() const {
  if (!is_integer()) {
    throw ArithmeticError("not an integer: " + str());
  }
  BigInt v = mantissa_;
  v <<= static_cast<unsigned>(-exponent_);
  return v;
}

BigInt DyadicScalar::floor_value() const {
  if (is_integer()) return to_integer();
  // exponent_ > 0 and mantissa odd: value = m / 2^e, not an integer.
  if (mantissa_ > 0) {
    return BigInt(mantissa_ >> static_cast<unsigned>(exponent_));
  }
  BigInt mag = -mantissa_;
  mag >>= static_cast<unsigned>(exponent_);
  return -mag - 1;
}

BigInt DyadicScalar::ceil_value() const {
  if (is_integer()) return to_integer();
  return floor_value() + 1;
}

std::string DyadicScalar::str() const {
  if (exponent_ == 0) return mantissa_.str();
  return mantissa_.str() + "*2^" + std::to_string(-exponent_);
}

DyadicScalar DyadicScalar::parse(std::string_view text) {
  const auto bad = [&]() -> ArithmeticError {
    return ArithmeticError("unparsable dyadic: \"" + std::string(text) + "\"");
  };
  const std::size_t sep = text.find("*2^");
  try {
    // cpp_int accepts "" as zero; an empty mantissa is malformed here.
    if (text.empty() || sep == 0) throw bad();
    if (sep == std::string_view::npos) {
      return DyadicScalar(BigInt(std::string(text)));
    }
    const BigInt m{std::string(text.substr(0, sep))};
    const std::string exp_part(text.substr(sep + 3));
    if (exp_part.empty()) throw bad();
    std::size_t used = 0;
    const long long p = std::stoll(exp_part, &used);
    if (used != exp_part.size()) throw bad();
    return DyadicScalar(m, -static_cast<std::int64_t>(p));
  } catch (const ArithmeticError&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

double DyadicScalar::to_double() const {
  if (is_zero()) return 0.0;
  const BigInt mag = abs_big(mantissa_);
  const std::int64_t bits = msb_index(mag) + 1;
  // Take the top 53 bits and rescale; good enough for display.
  std::int64_t drop = bits - 53;
  if (drop < 0) drop = 0;
  const BigInt top = mag >> static_cast<unsigned>(drop);
  const double lead = static_cast<double>(top.convert_to<std::uint64_t>());
  const std::int64_t scale = drop - exponent_;
  const double v = std::ldexp(lead, static_cast<int>(scale));
  return sign() < 0 ? -v : v;
}

}  // namespace rarebasis
