#include "vpyr/scalar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace vpyr {

namespace {

constexpr int kMaxExp = 960;

int ctz128(unsigned __int128 v) {
  auto lo = static_cast<std::uint64_t>(v);
  if (lo != 0) return __builtin_ctzll(lo);
  return 64 + __builtin_ctzll(static_cast<std::uint64_t>(v >> 64));
}

bool fits64(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Decimal literal with optional fraction and exponent, parsed exactly when
// the value is dyadic.
std::optional<Scalar> parse_decimal(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::string buf(s);
  char* end = nullptr;
  double approx = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || !std::isfinite(approx)) return std::nullopt;

  std::size_t pos = 0;
  bool neg = false;
  if (s[pos] == '+' || s[pos] == '-') neg = s[pos++] == '-';
  __int128 digits = 0;
  int pow10 = 0;
  bool overflow = false;
  bool seen_dot = false;
  int ndigits = 0;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    ++ndigits;
    if (digits > (static_cast<__int128>(1) << 120) / 10) {
      overflow = true;
      if (!seen_dot) ++pow10;
      continue;
    }
    digits = digits * 10 + (c - '0');
    if (seen_dot) --pow10;
  }
  if (ndigits == 0) return std::nullopt;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') return std::nullopt;
    long e = std::strtol(buf.c_str() + pos + 1, nullptr, 10);
    if (e > 40 || e < -40) overflow = true;
    pow10 += static_cast<int>(e);
  }
  if (overflow) return Scalar::real(approx);
  if (neg) digits = -digits;

  int exp2 = 0;
  while (pow10 > 0) {
    if (digits > (static_cast<__int128>(1) << 120) / 5 || -digits > (static_cast<__int128>(1) << 120) / 5)
      return Scalar::real(approx);
    digits *= 5;
    ++exp2;
    --pow10;
  }
  while (pow10 < 0) {
    if (digits % 5 != 0) return Scalar::real(approx);
    digits /= 5;
    --exp2;
    ++pow10;
  }
  // digits * 2^exp2 ; reduce to int64 if possible
  while (!fits64(digits) && (digits & 1) == 0) {
    digits /= 2;
    ++exp2;
  }
  if (!fits64(digits)) return Scalar::real(approx);
  return Scalar::dyadic(static_cast<std::int64_t>(digits), exp2);
}

// "2^k" or "2**k"
std::optional<int> parse_pow2(std::string_view s) {
  s = trim(s);
  std::string_view rest;
  if (s.substr(0, 2) == "2^") rest = s.substr(2);
  else if (s.substr(0, 3) == "2**") rest = s.substr(3);
  else return std::nullopt;
  std::string buf(trim(rest));
  if (buf.empty()) return std::nullopt;
  char* end = nullptr;
  long k = std::strtol(buf.c_str(), &end, 10);
  if (end != buf.c_str() + buf.size()) return std::nullopt;
  if (k > kMaxExp || k < -kMaxExp) return std::nullopt;
  return static_cast<int>(k);
}

}  // namespace

Scalar Scalar::from_wide(__int128 m, int e) {
  Scalar r;
  if (m == 0) return r;
  unsigned __int128 mag = m < 0 ? -static_cast<unsigned __int128>(m) : static_cast<unsigned __int128>(m);
  int tz = ctz128(mag);
  m >>= tz;
  long long ee = static_cast<long long>(e) + tz;
  double approx = std::ldexp(static_cast<double>(m), static_cast<int>(std::clamp(ee, -2000LL, 2000LL)));
  if (!fits64(m) || ee > kMaxExp || ee < -kMaxExp) return real(approx);
  r.mant_ = static_cast<std::int64_t>(m);
  r.exp_ = static_cast<int>(ee);
  r.approx_ = approx;
  return r;
}

Scalar Scalar::dyadic(std::int64_t mantissa, int exp2) { return from_wide(mantissa, exp2); }

Scalar Scalar::real(double v) {
  Scalar r;
  r.exact_ = false;
  r.approx_ = v;
  return r;
}

Scalar Scalar::from_double(double v) {
  if (!std::isfinite(v)) return real(v);
  if (v == 0.0) return Scalar();
  int e = 0;
  double f = std::frexp(v, &e);
  auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
  return from_wide(m, e - 53);
}

int Scalar::sign() const {
  if (exact_) return (mant_ > 0) - (mant_ < 0);
  return (approx_ > 0) - (approx_ < 0);
}

Scalar Scalar::operator-() const {
  if (!exact_) return real(-approx_);
  return from_wide(-static_cast<__int128>(mant_), exp_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (!a.exact_ || !b.exact_) return Scalar::real(a.approx_ + b.approx_);
  if (a.mant_ == 0) return b;
  if (b.mant_ == 0) return a;
  int e = std::min(a.exp_, b.exp_);
  int sa = a.exp_ - e;
  int sb = b.exp_ - e;
  if (sa > 62 || sb > 62) return Scalar::real(a.approx_ + b.approx_);
  __int128 m = (static_cast<__int128>(a.mant_) << sa) + (static_cast<__int128>(b.mant_) << sb);
  return Scalar::from_wide(m, e);
}

Scalar operator-(const Scalar& a, const Scalar& b) { return a + (-b); }

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (!a.exact_ || !b.exact_) return Scalar::real(a.approx_ * b.approx_);
  return Scalar::from_wide(static_cast<__int128>(a.mant_) * b.mant_, a.exp_ + b.exp_);
}

Scalar operator/(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_ && (b.mant_ == 1 || b.mant_ == -1)) {
    Scalar q = a.ldexp(-b.exp_);
    return b.mant_ < 0 ? -q : q;
  }
  return Scalar::real(a.approx_ / b.approx_);
}

Scalar Scalar::ldexp(int k) const {
  if (!exact_) return real(std::ldexp(approx_, k));
  if (mant_ == 0) return *this;
  return from_wide(mant_, exp_ + k);
}

bool operator==(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) return a.mant_ == b.mant_ && (a.mant_ == 0 || a.exp_ == b.exp_);
  return a.approx_ == b.approx_;
}

std::partial_ordering operator<=>(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) {
    Scalar d = a - b;
    if (d.exact_) return d.sign() <=> 0;
  }
  return a.approx_ <=> b.approx_;
}

std::string Scalar::str() const {
  char buf[64];
  if (!exact_) {
    std::snprintf(buf, sizeof buf, "%.17g", approx_);
    return buf;
  }
  if (mant_ == 0) return "0";
  if (exp_ >= 0) {
    if (exp_ <= 62 && fits64(static_cast<__int128>(mant_) << exp_)) {
      std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(static_cast<__int128>(mant_) << exp_));
    } else {
      std::snprintf(buf, sizeof buf, "%lld*2^%d", static_cast<long long>(mant_), exp_);
    }
    return buf;
  }
  std::snprintf(buf, sizeof buf, "%lld/2^%d", static_cast<long long>(mant_), -exp_);
  return buf;
}

std::optional<Scalar> Scalar::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  auto slash = text.find('/');
  auto star = text.find("*2^");
  if (slash == std::string_view::npos && star == std::string_view::npos) return parse_decimal(text);

  if (star != std::string_view::npos && slash == std::string_view::npos) {
    auto num = parse_decimal(text.substr(0, star));
    auto k = parse_pow2(text.substr(star + 1));
    if (!num || !k) return std::nullopt;
    return num->ldexp(*k);
  }
  auto num = parse_decimal(text.substr(0, slash));
  if (!num) return std::nullopt;
  std::string_view den_text = text.substr(slash + 1);
  if (auto k = parse_pow2(den_text)) return num->ldexp(-*k);
  auto den = parse_decimal(den_text);
  if (!den || den->is_zero()) return std::nullopt;
  return *num / *den;
}

}  // namespace vpyr
