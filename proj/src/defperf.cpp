#include "defiperf/defperf.hpp"

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

// Splits f into (d, n/d) given that d divides value(f). d inherits primes
// from f, so it is factored by repeated division.
std::pair<Factorization, Factorization> split(const Factorization& f, Natural d) {
  std::vector<PrimePower> dpart, rest;
  for (const auto& [p, a] : f.factors()) {
    unsigned b = 0;
    while (b < a && mpz_divisible_p(d.get_mpz_t(), p.get_mpz_t())) {
      mpz_divexact(d.get_mpz_t(), d.get_mpz_t(), p.get_mpz_t());
      ++b;
    }
    if (b > 0) dpart.push_back({p, b});
    if (a > b) rest.push_back({p, a - b});
  }
  if (d != 1) throw IntegrityError("deficient divisor does not divide n");
  return {Factorization::from_trusted_pairs(std::move(dpart)),
          Factorization::from_trusted_pairs(std::move(rest))};
}

}  // namespace

std::optional<DPWitness> dp_witness(const Factorization& f) {
  const Natural n = f.value();
  if (n < 2) throw DomainError("dp_witness: n must be >= 2");
  const Natural s = sigma(f);
  const Natural delta = 2 * n - s;
  if (delta < 1 || delta >= n) return std::nullopt;
  if (!mpz_divisible_p(n.get_mpz_t(), delta.get_mpz_t())) return std::nullopt;
  auto [d, D] = split(f, delta);
  return DPWitness{f, std::move(d), std::move(D), s};
}

bool is_almost_perfect(const DPWitness& w) { return w.d.empty(); }

Rational abundancy(const Factorization& f) { return Rational(sigma(f), f.value()); }

bool verify_eq1(const DPWitness& w) {
  const Natural n = w.n.value();
  const Natural d = w.d.value();
  const Natural D = w.D.value();
  if (d * D != n) {
    throw IntegrityError("witness " + n.get_str() + ": d*D = " + Natural(d * D).get_str() + " != n");
  }
  if (d >= n) throw IntegrityError("witness " + n.get_str() + ": d is not a proper divisor");
  const Natural s = sigma(w.n);
  if (s != w.sigma_n) {
    throw IntegrityError("witness " + n.get_str() + ": stored sigma " + w.sigma_n.get_str() +
                         " != " + s.get_str());
  }
  if (s != 2 * n - d) {
    throw IntegrityError("witness " + n.get_str() + ": sigma != 2n - d");
  }
  return s == (2 * D - 1) * d;
}

}  // namespace defiperf
