#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace loopsum {

/// Program integers. Arithmetic is checked: results outside the 64-bit range
/// raise OverflowError instead of wrapping.
using Int = std::int64_t;

class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

class DivisionByZero : public std::runtime_error {
 public:
  DivisionByZero() : std::runtime_error("division by zero") {}
};

namespace arith {

inline Int add(Int a, Int b) {
  Int r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("integer overflow in addition");
  return r;
}

inline Int sub(Int a, Int b) {
  Int r;
  if (__builtin_sub_overflow(a, b, &r)) throw OverflowError("integer overflow in subtraction");
  return r;
}

inline Int mul(Int a, Int b) {
  Int r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("integer overflow in multiplication");
  return r;
}

inline Int neg(Int a) { return sub(0, a); }

/// Division rounding toward negative infinity.
inline Int floor_div(Int a, Int b) {
  if (b == 0) throw DivisionByZero();
  if (b == -1) return neg(a);
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline Int ceil_div(Int a, Int b) { return neg(floor_div(neg(a), b)); }

/// Remainder with the sign of the divisor, so a == b * floor_div(a, b) + floor_mod(a, b).
inline Int floor_mod(Int a, Int b) {
  if (b == 0) throw DivisionByZero();
  if (b == -1) return 0;
  Int r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) r += b;
  return r;
}

inline Int ipow(Int base, Int exp) {
  if (exp < 0) throw std::domain_error("negative exponent");
  Int result = 1;
  while (exp > 0) {
    if (exp & 1) result = mul(result, base);
    exp >>= 1;
    if (exp > 0) base = mul(base, base);
  }
  return result;
}

inline Int gcd(Int a, Int b) {
  if (a < 0) a = neg(a);
  if (b < 0) b = neg(b);
  return std::gcd(a, b);
}

inline Int abs(Int a) { return a < 0 ? neg(a) : a; }

}  // namespace arith
}  // namespace loopsum
