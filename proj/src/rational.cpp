#include "defiperf/rational.hpp"

#include <string>

#include "defiperf/errors.hpp"

namespace defiperf {

Rational::Rational(mpz_class numerator, mpz_class denominator)
    : num_(std::move(numerator)), den_(std::move(denominator)) {
  if (den_ == 0) throw DomainError("rational with zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
  if (g > 1) {
    mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

Rational& Rational::operator+=(const Rational& rhs) {
  num_ = num_ * rhs.den_ + rhs.num_ * den_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  num_ = num_ * rhs.den_ - rhs.num_ * den_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  num_ *= rhs.num_;
  den_ *= rhs.den_;
  normalize();
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw DomainError("rational division by zero");
  num_ *= rhs.den_;
  den_ *= rhs.num_;
  normalize();
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const int c = cmp(mpz_class(a.num_ * b.den_), mpz_class(b.num_ * a.den_));
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string Rational::to_string() const {
  if (den_ == 1) return num_.get_str();
  return num_.get_str() + "/" + den_.get_str();
}

Rational Rational::parse(std::string_view text) {
  const auto slash = text.find('/');
  mpz_class num, den(1);
  auto read = [](std::string_view part, mpz_class& out) {
    std::string s(part);
    std::size_t start = (!s.empty() && s[0] == '-') ? 1 : 0;
    bool digits = s.size() > start;
    for (std::size_t i = start; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') digits = false;
    }
    if (!digits || out.set_str(s, 10) != 0) {
      throw DomainError("malformed rational '" + s + "'");
    }
  };
  if (slash == std::string_view::npos) {
    read(text, num);
  } else {
    read(text.substr(0, slash), num);
    read(text.substr(slash + 1), den);
  }
  return Rational(num, den);
}

Rational Rational::reciprocal() const { return Rational(den_, num_); }

}  // namespace defiperf
