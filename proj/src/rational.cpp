#include "soficlab/rational.hpp"

#include <cstdlib>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace soficlab {

namespace {

using i128 = __int128;

long long checked_narrow(i128 v) {
  if (v > i128(INT64_MAX) || v < i128(INT64_MIN))
    throw std::overflow_error("rational overflow");
  return (long long)v;
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make_reduced(i128 num, i128 den) {
  if (den == 0) throw std::invalid_argument("rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(checked_narrow(num), checked_narrow(den));
}

}  // namespace

Rational::Rational(long long num, long long den) : num_(num), den_(den) {
  if (den_ == 0) throw std::invalid_argument("rational: zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  long long g = std::gcd(num_ < 0 ? -num_ : num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
  if (num_ == 0) den_ = 1;
}

double Rational::to_double() const { return double(num_) / double(den_); }

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator-() const { return Rational(-num_, den_); }

Rational Rational::operator+(const Rational& o) const {
  return make_reduced(i128(num_) * o.den_ + i128(o.num_) * den_,
                      i128(den_) * o.den_);
}

Rational Rational::operator-(const Rational& o) const {
  return make_reduced(i128(num_) * o.den_ - i128(o.num_) * den_,
                      i128(den_) * o.den_);
}

Rational Rational::operator*(const Rational& o) const {
  return make_reduced(i128(num_) * o.num_, i128(den_) * o.den_);
}

Rational Rational::operator/(const Rational& o) const {
  if (o.num_ == 0) throw std::invalid_argument("rational: division by zero");
  return make_reduced(i128(num_) * o.den_, i128(den_) * o.num_);
}

Rational Rational::abs() const { return num_ < 0 ? -*this : *this; }

bool Rational::operator<(const Rational& o) const {
  return i128(num_) * o.den_ < i128(o.num_) * den_;
}

bool Rational::operator<=(const Rational& o) const {
  return i128(num_) * o.den_ <= i128(o.num_) * den_;
}

bool Rational::leq(double threshold) const {
  return (long double)num_ <= (long double)threshold * (long double)den_;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(std::stoll(text), 1);
  return Rational(std::stoll(text.substr(0, slash)),
                  std::stoll(text.substr(slash + 1)));
}

}  // namespace soficlab
