#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace soficlab {

/// Exact rational, stored in lowest terms with positive denominator.
/// Arithmetic uses 128-bit intermediates and throws std::overflow_error
/// if a reduced result does not fit in 64 bits.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long num, long long den);
  static Rational integer(long long n) { return Rational(n, 1); }

  long long num() const { return num_; }
  long long den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  double to_double() const;
  std::string str() const;

  Rational operator-() const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator*(const Rational& o) const;
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  Rational abs() const;

  bool operator==(const Rational& o) const {
    return num_ == o.num_ && den_ == o.den_;
  }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const;
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  // Exact value vs. a double threshold (threshold taken at its exact
  // binary value).
  bool leq(double threshold) const;

 private:
  long long num_;
  long long den_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Parses "3/4", "-1/2", "1", "0".
Rational parse_rational(const std::string& text);

}  // namespace soficlab
