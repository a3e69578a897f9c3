#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

#include "defiperf/rational.hpp"

namespace defiperf {

using Natural = mpz_class;
using Integer = mpz_class;

struct PrimePower {
  Natural p;
  unsigned a = 0;

  bool operator==(const PrimePower&) const = default;
};

/// Canonical prime factorization: primes strictly ascending, exponents >= 1.
/// The empty list denotes 1.
class Factorization {
 public:
  Factorization() = default;

  /// Validates ordering, exponents and primality of every base.
  static Factorization from_pairs(std::vector<PrimePower> factors);
  /// Validates ordering and exponents only; bases are trusted to be prime.
  static Factorization from_trusted_pairs(std::vector<PrimePower> factors);
  /// Parses `p1^a1*p2^a2*...` (a bare `p` means `p^1`, `1` is the empty
  /// product). Ascending primes are enforced.
  static Factorization parse(std::string_view literal);

  const std::vector<PrimePower>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  bool empty() const { return factors_.empty(); }

  Natural value() const;
  /// Exponent of `p`, 0 when absent.
  unsigned exponent_of(const Natural& p) const;
  std::string to_string() const;

  bool operator==(const Factorization&) const = default;

 private:
  explicit Factorization(std::vector<PrimePower> factors) : factors_(std::move(factors)) {}
  static void check_shape(const std::vector<PrimePower>& factors);

  std::vector<PrimePower> factors_;
};

/// Strict decimal parse: digits only, no sign or whitespace.
Natural parse_natural(std::string_view text);

Natural pow(const Natural& base, unsigned long exponent);
/// base^exponent mod modulus, result in [0, modulus).
Natural powmod(const Integer& base, const Natural& exponent, const Natural& modulus);
/// Nonnegative residue of a modulo m.
Natural mod(const Integer& a, const Natural& m);

/// sigma(p^a) = (p^(a+1) - 1) / (p - 1); sigma(p^0) = 1.
Natural sigma_prime_power(const Natural& p, unsigned a);
Natural sigma(const Factorization& f);

/// Least h >= 1 with a^h = 1 (mod m). Requires m >= 2 and gcd(a, m) = 1.
Natural mult_order(const Natural& a, const Natural& m);

/// Jacobi symbol (a/n) for odd n >= 1.
int jacobi(const Integer& a, const Natural& n);
/// Legendre symbol (a/q) for an odd prime q.
int legendre(const Integer& a, const Natural& q);

enum class Primality { Composite, Proven, Probable };

/// Below 2^64: deterministic Miller-Rabin on the first twelve prime bases.
/// Above: the same bases plus a strong Lucas-Selfridge test.
Primality primality(const Natural& n);
bool is_prime(const Natural& n);
/// Version tag of the primality procedure, echoed in certificates.
inline constexpr std::string_view kPrimalityVersion = "mr12+slucas/1";

Natural next_prime(const Natural& n);  // smallest prime > n
Natural prev_prime(const Natural& n);  // largest prime < n, 0 if none

/// Primes <= limit by a plain sieve.
std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

struct FactorBudget {
  std::uint64_t trial_limit = 1'000'000;
  std::uint64_t rho_iterations = 200'000;
  std::uint64_t seed = 0x5eed'defa'cade'0001ULL;

  bool operator==(const FactorBudget&) const = default;
};

struct FactorResult {
  Factorization factors;
  /// Product of composite cofactors left unfactored; 1 when fully factored.
  Natural residue{1};
  bool fully_factored = true;
  std::uint64_t seed = 0;
};

/// Trial division up to budget.trial_limit, then Brent's rho with a seeded
/// generator. Budget exhaustion leaves a composite residue.
FactorResult factorize(const Natural& n, const FactorBudget& budget = {});

}  // namespace defiperf
