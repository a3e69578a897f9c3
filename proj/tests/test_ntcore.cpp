#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "defiperf/errors.hpp"
#include "defiperf/ntcore.hpp"
#include "defiperf/rational.hpp"

using namespace defiperf;

TEST_CASE("sigma of prime powers and of the odd solution") {
  CHECK(sigma_prime_power(13, 2) == 183);
  CHECK(sigma_prime_power(3, 2) == 13);
  CHECK(sigma_prime_power(7, 0) == 1);
  CHECK(sigma(Factorization{}) == 1);
  CHECK(sigma(Factorization::parse("3^2*7^2*11^2*13^2")) == 18035199);
  CHECK_THROWS_AS(sigma_prime_power(9, 2), DomainError);
}

TEST_CASE("multiplicative orders") {
  CHECK(mult_order(11, 25) == 5);
  CHECK(mult_order(3, 17) == 16);
  CHECK(mult_order(43, 49) == 7);
  CHECK(mult_order(1, 7) == 1);
  CHECK_THROWS_AS(mult_order(5, 25), DomainError);
  CHECK_THROWS_AS(mult_order(2, 1), DomainError);
}

TEST_CASE("legendre symbols") {
  CHECK(legendre(2, 11) == -1);
  CHECK(legendre(3, 11) == 1);
  CHECK(legendre(2, 1093) == -1);
  CHECK(legendre(2, 71) == 1);
  CHECK(legendre(22, 11) == 0);
  CHECK(legendre(-1, 13) == 1);
  CHECK_THROWS_AS(legendre(2, 15), DomainError);
  CHECK_THROWS_AS(legendre(3, 2), DomainError);
}

TEST_CASE("primality and factorization examples") {
  CHECK(is_prime(1093));
  CHECK_FALSE(is_prime(1));
  CHECK_FALSE(is_prime(9018009));
  CHECK(Factorization::parse("2*5^2*3221") == factorize(161050).factors);
  CHECK(factorize(819).factors.to_string() == "3^2*7*13");
  CHECK(primality(Natural("340282366920938463463374607431768211507")) == Primality::Probable);
  CHECK(primality(Natural("18446744073709551557")) == Primality::Proven);
}

TEST_CASE("factorization literals") {
  const auto f = Factorization::parse("3^2*7^2*11^2*13^2");
  CHECK(f.value() == 9018009);
  CHECK(f.exponent_of(7) == 2);
  CHECK(f.exponent_of(5) == 0);
  CHECK(Factorization::parse("1").empty());
  CHECK_THROWS(Factorization::parse("7^2*3^2"));
  CHECK_THROWS(Factorization::parse("4^2"));
  CHECK_THROWS(Factorization::parse("3^0"));
  CHECK_THROWS(Factorization::parse("x"));
  CHECK_THROWS(parse_natural("-3"));
}

TEST_CASE("sigma is multiplicative on coprime pairs") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::uint64_t> dist(1, 1'000'000);
  int checked = 0;
  while (checked < 300) {
    const std::uint64_t a = dist(rng), b = dist(rng);
    if (std::gcd(a, b) != 1) continue;
    const Natural sa = sigma(factorize(Natural(std::to_string(a))).factors);
    const Natural sb = sigma(factorize(Natural(std::to_string(b))).factors);
    const Natural sab = sigma(factorize(Natural(std::to_string(a)) * Natural(std::to_string(b))).factors);
    REQUIRE(sab == sa * sb);
    ++checked;
  }
}

TEST_CASE("sigma of factorize matches divisor enumeration up to 1e5") {
  const auto table = oracles::sigma_table(100000);
  for (std::uint64_t n = 1; n <= 100000; ++n) {
    const auto r = factorize(Natural(static_cast<unsigned long>(n)));
    REQUIRE(r.fully_factored);
    REQUIRE(r.factors.value() == static_cast<unsigned long>(n));
    REQUIRE(sigma(r.factors) == static_cast<unsigned long>(table[n]));
  }
  CHECK(oracles::divisor_sum(9018009) == 18035199);
}

TEST_CASE("primality agrees with trial division below 2e5") {
  for (std::uint64_t n = 0; n < 200000; ++n) {
    REQUIRE(is_prime(Natural(static_cast<unsigned long>(n))) == oracles::is_prime_td(n));
  }
}

TEST_CASE("factorize recovers random products of primes") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    Natural n = 1;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < k; ++j) n *= next_prime(Natural(static_cast<unsigned long>(rng() % 4'000'000'000ULL)));
    const auto r = factorize(n);
    REQUIRE(r.fully_factored);
    REQUIRE(r.factors.value() == n);
    for (const auto& pp : r.factors.factors()) REQUIRE(is_prime(pp.p));
  }
}

TEST_CASE("order property: a^h = 1 and no a^(h/r) = 1") {
  std::mt19937_64 rng(11);
  int checked = 0;
  while (checked < 2000) {
    const std::uint64_t m = 2 + rng() % 5000;
    const std::uint64_t a = rng() % m;
    if (std::gcd(a, m) != 1) continue;
    const Natural h = mult_order(a, m);
    const std::uint64_t hv = h.get_ui();
    REQUIRE(oracles::powmod(a, hv, m) == 1 % m);
    const auto hf = factorize(h);
    for (const auto& pp : hf.factors.factors()) {
      REQUIRE(oracles::powmod(a, hv / pp.p.get_ui(), m) != 1 % m);
    }
    REQUIRE(hv == oracles::order_by_steps(a, m));
    ++checked;
  }
}

TEST_CASE("legendre matches Euler's criterion and the list of squares") {
  std::mt19937_64 rng(13);
  const auto primes = primes_up_to(10000);
  for (int i = 0; i < 3000; ++i) {
    const std::uint64_t q = primes[1 + rng() % (primes.size() - 1)];
    const std::int64_t a = static_cast<std::int64_t>(rng() % 100000) - 50000;
    const int l = legendre(a, q);
    const std::uint64_t e = oracles::powmod(static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(q)) + q) % q),
                                            (q - 1) / 2, q);
    const int euler = e == 0 ? 0 : (e == 1 ? 1 : -1);
    REQUIRE(l == euler);
    if (q < 2000) REQUIRE(l == oracles::legendre_by_squares(a, q));
  }
}

TEST_CASE("jacobi is multiplicative in the top argument") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Natural n = 2 * (rng() % 5000) + 1;
    const Integer a = static_cast<long>(rng() % 10000), b = static_cast<long>(rng() % 10000);
    REQUIRE(jacobi(a * b, n) == jacobi(a, n) * jacobi(b, n));
  }
}

TEST_CASE("next and previous primes") {
  CHECK(next_prime(1) == 2);
  CHECK(next_prime(13) == 17);
  CHECK(prev_prime(2) == 0);
  CHECK(prev_prime(1094) == 1093);
  CHECK(primes_up_to(30).size() == 10);
}

TEST_CASE("rational canonical form after every operation") {
  std::mt19937_64 rng(19);
  auto rnd = [&] {
    long num = static_cast<long>(rng() % 2001) - 1000;
    long den = static_cast<long>(rng() % 999) + 1;
    if (rng() % 2) den = -den;
    return Rational(num, den);
  };
  auto canonical = [](const Rational& r) {
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.numerator().get_mpz_t(), r.denominator().get_mpz_t());
    return r.denominator() > 0 && g == 1;
  };
  for (int i = 0; i < 5000; ++i) {
    const Rational a = rnd(), b = rnd();
    REQUIRE(canonical(a));
    REQUIRE(canonical(a + b));
    REQUIRE(canonical(a - b));
    REQUIRE(canonical(a * b));
    if (b != Rational(0)) {
      REQUIRE(canonical(a / b));
      REQUIRE((a / b) * b == a);
    }
    REQUIRE((a < b) == (a.numerator() * b.denominator() < b.numerator() * a.denominator()));
    REQUIRE(Rational::parse(a.to_string()) == a);
  }
  CHECK(Rational(4, 6).to_string() == "2/3");
  CHECK(Rational(-4, -2).to_string() == "2");
  CHECK_THROWS_AS(Rational(1, 0), DomainError);
  CHECK_THROWS(Rational::parse("1/"));
  CHECK_THROWS(Rational::parse("1.5"));
}
