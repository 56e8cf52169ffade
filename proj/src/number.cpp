#include "gamacro/number.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gamacro {

namespace {

using i128 = __int128;

bool fits(i128 v) {
  return v >= INT64_MIN + 1 && v <= INT64_MAX;
}

Number make(i128 n, i128 d) {
  if (d == 0) throw std::domain_error("division by zero");
  if (d < 0) { n = -n; d = -d; }
  i128 a = n < 0 ? -n : n, b = d;
  while (b != 0) { i128 t = a % b; a = b; b = t; }
  if (a > 1) { n /= a; d /= a; }
  if (fits(n) && fits(d)) return Number::rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
  return Number::real(static_cast<double>(n) / static_cast<double>(d));
}

}  // namespace

Number Number::rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("division by zero");
  if (den < 0) { num = -num; den = -den; }
  std::int64_t g = std::gcd(num, den);
  Number r;
  r.exact_ = true;
  r.num_ = g > 1 ? num / g : num;
  r.den_ = g > 1 ? den / g : den;
  return r;
}

Number Number::real(double v) {
  Number r;
  r.exact_ = false;
  r.real_ = v;
  return r;
}

Number Number::snap(double v, double tol) {
  if (std::abs(v) < tol) return Number(0);
  if (!std::isfinite(v)) return real(v);
  // continued fraction expansion
  double x = v;
  i128 h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int i = 0; i < 40; ++i) {
    double a = std::floor(x);
    if (std::abs(a) > 1e15) break;
    i128 ai = static_cast<i128>(a);
    i128 h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > 1000000) break;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (std::abs(static_cast<double>(h1) / static_cast<double>(k1) - v) <= tol)
      return make(h1, k1);
    double frac = x - a;
    if (frac < 1e-300) break;
    x = 1.0 / frac;
  }
  return real(v);
}

Number Number::parse_decimal(const std::string& text) {
  // digits [. digits] [e|E [+-] digits]
  std::size_t i = 0;
  i128 mant = 0;
  int scale = 0;
  bool overflow = false;
  int digits = 0;
  for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
    if (++digits > 18) overflow = true;
    mant = mant * 10 + (text[i] - '0');
  }
  if (i < text.size() && text[i] == '.') {
    for (++i; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      if (mant == 0 && text[i] == '0') { --scale; continue; }
      if (++digits > 18) overflow = true;
      mant = mant * 10 + (text[i] - '0');
      --scale;
    }
  }
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int sgn = 1;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) { sgn = text[i] == '-' ? -1 : 1; ++i; }
    int e = 0;
    for (; i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      e = e * 10 + (text[i] - '0');
      if (e > 400) overflow = true;
    }
    scale += sgn * e;
  }
  if (!overflow && scale >= -18 && scale <= 18) {
    i128 p = 1;
    for (int k = 0; k < std::abs(scale); ++k) p *= 10;
    i128 n = scale >= 0 ? mant * p : mant;
    i128 d = scale >= 0 ? 1 : p;
    if (fits(n) && fits(d)) return make(n, d);
  }
  return real(std::stod(text));
}

double Number::value() const {
  return exact_ ? static_cast<double>(num_) / static_cast<double>(den_) : real_;
}

int Number::sign() const {
  if (exact_) return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0);
  return real_ > 0 ? 1 : (real_ < 0 ? -1 : 0);
}

Number Number::operator-() const {
  if (exact_) return rational(-num_, den_);
  return real(-real_);
}

Number operator+(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_)
    return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
  return Number::real(a.value() + b.value());
}

Number operator-(const Number& a, const Number& b) { return a + (-b); }

Number operator*(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
  return Number::real(a.value() * b.value());
}

Number operator/(const Number& a, const Number& b) {
  if (b.exact_ && b.num_ == 0) throw std::domain_error("division by exact zero");
  if (a.exact_ && b.exact_) return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
  return Number::real(a.value() / b.value());
}

Number Number::pow(int e) const {
  if (e < 0) return Number(1) / pow(-e);
  Number r(1), base = *this;
  while (e > 0) {
    if (e & 1) r = r * base;
    base = base * base;
    e >>= 1;
  }
  return r;
}

bool operator==(const Number& a, const Number& b) {
  if (a.exact_ != b.exact_) return false;
  if (a.exact_) return a.num_ == b.num_ && a.den_ == b.den_;
  return a.real_ == b.real_;
}

int Number::compare(const Number& a, const Number& b) {
  if (a.exact_ && b.exact_) {
    i128 l = i128(a.num_) * b.den_, r = i128(b.num_) * a.den_;
    return l < r ? -1 : (l > r ? 1 : 0);
  }
  double x = a.value(), y = b.value();
  if (x < y) return -1;
  if (x > y) return 1;
  if (a.exact_ != b.exact_) return a.exact_ ? -1 : 1;
  return 0;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

std::string Number::str() const {
  if (!exact_) return format_double(real_);
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

std::uint64_t Number::hash() const {
  auto mix = [](std::uint64_t h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  };
  if (exact_) return mix(mix(0x51, static_cast<std::uint64_t>(num_)), static_cast<std::uint64_t>(den_));
  std::uint64_t bits;
  double r = real_ == 0.0 ? 0.0 : real_;
  __builtin_memcpy(&bits, &r, sizeof bits);
  return mix(0x77, bits);
}

}  // namespace gamacro
