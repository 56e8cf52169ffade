#pragma once
#include <cstdint>
#include <string>

namespace gamacro {

// Exact rational over int64, or a double once exactness is lost.
class Number {
public:
  Number() = default;
  Number(std::int64_t v) : num_(v) {}  // NOLINT: implicit by intent
  Number(int v) : num_(v) {}           // NOLINT
  static Number rational(std::int64_t num, std::int64_t den);
  static Number real(double v);
  // Nearest small-denominator rational within tol, else a double.
  static Number snap(double v, double tol = 1e-12);
  // Exact rational for finite decimal text, else double.
  static Number parse_decimal(const std::string& text);

  bool exact() const { return exact_; }
  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const;
  bool is_zero() const { return exact_ ? num_ == 0 : real_ == 0.0; }
  bool is_one() const { return exact_ && num_ == 1 && den_ == 1; }
  bool is_minus_one() const { return exact_ && num_ == -1 && den_ == 1; }
  bool is_integer() const { return exact_ && den_ == 1; }
  bool negative() const { return exact_ ? num_ < 0 : real_ < 0; }
  int sign() const;

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator-(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);  // throws on exact 0
  Number& operator+=(const Number& b) { return *this = *this + b; }
  Number& operator*=(const Number& b) { return *this = *this * b; }
  Number pow(int e) const;
  Number abs() const { return negative() ? -*this : *this; }

  // Exact equality: rationals compare exactly, doubles bitwise by value.
  friend bool operator==(const Number& a, const Number& b);
  // Total order by value, exact before real on ties.
  static int compare(const Number& a, const Number& b);

  std::string str() const;  // "3", "-1/2", or shortest round-trip double
  std::uint64_t hash() const;

private:
  bool exact_ = true;
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
  double real_ = 0.0;
};

std::string format_double(double v);  // shortest round-trip

}  // namespace gamacro
