#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace vpyr {

// A number that is either an exact dyadic rational m * 2^e (m odd or zero)
// or a plain double. Exact operands stay exact under +, -, *, min, max and
// division by powers of two; anything else (or int64 overflow) falls back
// to double.
class Scalar {
 public:
  Scalar() = default;
  Scalar(int v) : Scalar(dyadic(v, 0)) {}

  static Scalar dyadic(std::int64_t mantissa, int exp2);
  static Scalar real(double v);
  // Exact when v is finite (every finite double is dyadic) and the mantissa fits.
  static Scalar from_double(double v);
  static Scalar pow2(int e) { return dyadic(1, e); }

  // Accepts "3", "-5/8", "3/2^4", "0.375", "1e-3", "2.5/2^3". Values that are
  // not dyadic (e.g. "1/3", "0.1") become inexact.
  static std::optional<Scalar> parse(std::string_view text);

  bool exact() const { return exact_; }
  double value() const { return approx_; }
  std::int64_t mantissa() const { return mant_; }
  int exponent() const { return exp_; }
  bool is_zero() const { return exact_ ? mant_ == 0 : approx_ == 0.0; }
  int sign() const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  friend Scalar operator*(const Scalar& a, const Scalar& b);
  // Exact when b is a power of two (up to sign), inexact otherwise.
  friend Scalar operator/(const Scalar& a, const Scalar& b);
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  Scalar ldexp(int k) const;
  Scalar abs() const { return sign() < 0 ? -*this : *this; }

  friend bool operator==(const Scalar& a, const Scalar& b);
  friend std::partial_ordering operator<=>(const Scalar& a, const Scalar& b);

  // "p/2^k" style for exact values, %.17g for inexact ones.
  std::string str() const;

 private:
  std::int64_t mant_ = 0;
  int exp_ = 0;
  bool exact_ = true;
  double approx_ = 0.0;

  static Scalar from_wide(__int128 m, int e);
};

inline Scalar min(const Scalar& a, const Scalar& b) { return b < a ? b : a; }
inline Scalar max(const Scalar& a, const Scalar& b) { return a < b ? b : a; }

}  // namespace vpyr
