#pragma once

#include <compare>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace defiperf {

/// Exact fraction, always in lowest terms with a positive denominator.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(const mpz_class& value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(mpz_class numerator, mpz_class denominator);

  const mpz_class& numerator() const { return num_; }
  const mpz_class& denominator() const { return den_; }

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// "n/d", or just "n" when the denominator is 1.
  std::string to_string() const;
  static Rational parse(std::string_view text);

  Rational reciprocal() const;

 private:
  void normalize();

  mpz_class num_;
  mpz_class den_;
};

}  // namespace defiperf
