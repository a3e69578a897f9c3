#include "defiperf/ntcore.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <random>

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

constexpr std::array<unsigned long, 12> kWitnessBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

const mpz_class& two_pow_64() {
  static const mpz_class value = [] {
    mpz_class v;
    mpz_ui_pow_ui(v.get_mpz_t(), 2, 64);
    return v;
  }();
  return value;
}

bool strong_probable_prime(const mpz_class& n, unsigned long base) {
  const mpz_class n_minus_1 = n - 1;
  mpz_class d = n_minus_1;
  const auto s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

  mpz_class x;
  mpz_class b(base);
  mpz_powm(x.get_mpz_t(), b.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
  if (x == 1 || x == n_minus_1) return true;
  for (mp_bitcnt_t r = 1; r < s; ++r) {
    x = x * x % n;
    if (x == n_minus_1) return true;
    if (x == 1) return false;
  }
  return false;
}

mpz_class half_mod(mpz_class v, const mpz_class& n) {
  if (mpz_odd_p(v.get_mpz_t())) v += n;
  mpz_fdiv_q_2exp(v.get_mpz_t(), v.get_mpz_t(), 1);
  return v;
}

// Strong Lucas probable-prime test with Selfridge's parameter choice.
// n is odd, > 2^64 and not a perfect square.
bool strong_lucas_probable_prime(const mpz_class& n) {
  long dd = 5;
  for (;;) {
    const int j = jacobi(mpz_class(dd), n);
    if (j == -1) break;
    if (j == 0 && mpz_class(dd < 0 ? -dd : dd) != n) return false;
    dd = dd > 0 ? -(dd + 2) : -(dd - 2);
  }
  const mpz_class D(dd);
  const mpz_class P(1);
  const mpz_class Q = mod(mpz_class((1 - dd) / 4), n);

  mpz_class d = n + 1;
  const auto s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);

  const auto bits = mpz_sizeinbase(d.get_mpz_t(), 2);
  mpz_class U(1), V(P), Qk(Q);
  const mpz_class Dm = mod(D, n);
  for (long i = static_cast<long>(bits) - 2; i >= 0; --i) {
    U = U * V % n;
    V = mod(mpz_class(V * V - 2 * Qk), n);
    Qk = Qk * Qk % n;
    if (mpz_tstbit(d.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
      mpz_class U2 = half_mod(mod(mpz_class(P * U + V), n), n);
      mpz_class V2 = half_mod(mod(mpz_class(Dm * U + P * V), n), n);
      U = std::move(U2);
      V = std::move(V2);
      Qk = Qk * Q % n;
    }
  }
  if (U == 0 || V == 0) return true;
  for (mp_bitcnt_t r = 1; r < s; ++r) {
    V = mod(mpz_class(V * V - 2 * Qk), n);
    if (V == 0) return true;
    Qk = Qk * Qk % n;
  }
  return false;
}

const std::vector<std::uint64_t>& default_trial_primes() {
  static const std::vector<std::uint64_t> primes = primes_up_to(FactorBudget{}.trial_limit);
  return primes;
}

mpz_class random_below(std::mt19937_64& rng, const mpz_class& n) {
  mpz_class r = 0;
  const auto limbs = mpz_sizeinbase(n.get_mpz_t(), 2) / 64 + 1;
  for (std::size_t i = 0; i < limbs; ++i) {
    r <<= 64;
    r += mpz_class(static_cast<unsigned long>(rng()));
  }
  return r % n;
}

// Brent's variant of Pollard rho. Returns a nontrivial factor of the odd
// composite n, or nothing when the iteration budget runs out.
std::optional<mpz_class> brent_rho(const mpz_class& n, std::mt19937_64& rng,
                                   std::uint64_t& remaining) {
  constexpr std::uint64_t kBatch = 128;
  while (remaining > 0) {
    const mpz_class c = random_below(rng, n - 1) + 1;
    mpz_class y = random_below(rng, n);
    mpz_class x, ys, q(1), g(1);
    auto step = [&](const mpz_class& v) { return mpz_class((v * v + c) % n); };
    std::uint64_t r = 1;
    do {
      x = y;
      for (std::uint64_t i = 0; i < r; ++i) y = step(y);
      std::uint64_t k = 0;
      do {
        ys = y;
        const std::uint64_t lim = std::min(kBatch, r - k);
        for (std::uint64_t i = 0; i < lim; ++i) {
          y = step(y);
          mpz_class diff = x - y;
          q = q * abs(diff) % n;
        }
        remaining = remaining > lim ? remaining - lim : 0;
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += lim;
      } while (k < r && g == 1 && remaining > 0);
      r *= 2;
    } while (g == 1 && remaining > 0);

    if (g == n || g == 0) {
      // Batched product collapsed; backtrack one step at a time.
      g = 1;
      for (std::uint64_t guard = 0; g == 1 && guard < 4 * r; ++guard) {
        ys = step(ys);
        mpz_class diff = x - ys;
        diff = abs(diff);
        mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
      }
    }
    if (g != 1 && g != n && g != 0) return g;
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------
// Factorization

void Factorization::check_shape(const std::vector<PrimePower>& factors) {
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (factors[i].a == 0) throw DomainError("factorization exponent must be >= 1");
    if (factors[i].p < 2) throw DomainError("factorization base must be >= 2");
    if (i > 0 && !(factors[i - 1].p < factors[i].p)) {
      throw DomainError("factorization primes must be strictly ascending");
    }
  }
}

Factorization Factorization::from_pairs(std::vector<PrimePower> factors) {
  check_shape(factors);
  for (const auto& pp : factors) {
    if (!is_prime(pp.p)) throw DomainError("factorization base " + pp.p.get_str() + " is not prime");
  }
  return Factorization(std::move(factors));
}

Factorization Factorization::from_trusted_pairs(std::vector<PrimePower> factors) {
  check_shape(factors);
  return Factorization(std::move(factors));
}

Factorization Factorization::parse(std::string_view literal) {
  if (literal == "1") return Factorization();
  std::vector<PrimePower> out;
  std::size_t pos = 0;
  while (pos <= literal.size()) {
    const auto star = literal.find('*', pos);
    const auto term = literal.substr(pos, star == std::string_view::npos ? std::string_view::npos : star - pos);
    const auto caret = term.find('^');
    PrimePower pp;
    pp.p = parse_natural(term.substr(0, caret));
    if (caret == std::string_view::npos) {
      pp.a = 1;
    } else {
      const Natural e = parse_natural(term.substr(caret + 1));
      if (!e.fits_uint_p()) throw DomainError("exponent too large in '" + std::string(term) + "'");
      pp.a = static_cast<unsigned>(e.get_ui());
    }
    out.push_back(std::move(pp));
    if (star == std::string_view::npos) break;
    pos = star + 1;
  }
  return from_pairs(std::move(out));
}

Natural Factorization::value() const {
  Natural v(1);
  for (const auto& pp : factors_) v *= pow(pp.p, pp.a);
  return v;
}

unsigned Factorization::exponent_of(const Natural& p) const {
  for (const auto& pp : factors_) {
    if (pp.p == p) return pp.a;
  }
  return 0;
}

std::string Factorization::to_string() const {
  if (factors_.empty()) return "1";
  std::string out;
  for (const auto& pp : factors_) {
    if (!out.empty()) out += '*';
    out += pp.p.get_str();
    if (pp.a != 1) out += "^" + std::to_string(pp.a);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Arithmetic helpers

Natural parse_natural(std::string_view text) {
  if (text.empty()) throw DomainError("empty number");
  for (char c : text) {
    if (c < '0' || c > '9') throw DomainError("malformed number '" + std::string(text) + "'");
  }
  Natural v;
  v.set_str(std::string(text), 10);
  return v;
}

Natural pow(const Natural& base, unsigned long exponent) {
  Natural r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exponent);
  return r;
}

Natural powmod(const Integer& base, const Natural& exponent, const Natural& modulus) {
  if (modulus <= 0) throw DomainError("powmod modulus must be positive");
  if (modulus == 1) return Natural(0);
  Natural r;
  const Natural b = mod(base, modulus);
  mpz_powm(r.get_mpz_t(), b.get_mpz_t(), exponent.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

Natural mod(const Integer& a, const Natural& m) {
  Natural r;
  mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return r;
}

// ---------------------------------------------------------------------------
// sigma

Natural sigma_prime_power(const Natural& p, unsigned a) {
  if (!is_prime(p)) throw DomainError("sigma_prime_power: " + p.get_str() + " is not prime");
  if (a == 0) return Natural(1);
  Natural num = pow(p, a + 1UL) - 1;
  Natural den = p - 1;
  mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  return num;
}

Natural sigma(const Factorization& f) {
  Natural s(1);
  for (const auto& pp : f.factors()) {
    Natural num = pow(pp.p, pp.a + 1UL) - 1;
    Natural den = pp.p - 1;
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    s *= num;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Multiplicative order

Natural mult_order(const Natural& a_in, const Natural& m) {
  if (m < 2) throw DomainError("mult_order: modulus must be >= 2");
  const Natural a = mod(a_in, m);
  Natural g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  if (g != 1) {
    throw DomainError("mult_order: gcd(" + a_in.get_str() + ", " + m.get_str() + ") != 1");
  }
  if (a == 1) return Natural(1);

  const FactorResult fm = factorize(m);
  if (!fm.fully_factored) throw DomainError("mult_order: could not factor modulus " + m.get_str());

  // Carmichael lambda(m) and the set of primes dividing it.
  Natural lambda(1);
  std::map<Natural, bool> lambda_primes;
  for (const auto& [p, k] : fm.factors.factors()) {
    Natural part;
    if (p == 2) {
      part = k == 1 ? Natural(1) : (k == 2 ? Natural(2) : pow(Natural(2), k - 2));
      if (k >= 2) lambda_primes[Natural(2)] = true;
    } else {
      part = pow(p, k - 1) * (p - 1);
      if (k >= 2) lambda_primes[p] = true;
      const FactorResult fp = factorize(p - 1);
      if (!fp.fully_factored) throw DomainError("mult_order: could not factor " + Natural(p - 1).get_str());
      for (const auto& pp : fp.factors.factors()) lambda_primes[pp.p] = true;
    }
    mpz_lcm(lambda.get_mpz_t(), lambda.get_mpz_t(), part.get_mpz_t());
  }

  Natural h = lambda;
  for (const auto& [r, unused] : lambda_primes) {
    (void)unused;
    while (mpz_divisible_p(h.get_mpz_t(), r.get_mpz_t())) {
      Natural reduced;
      mpz_divexact(reduced.get_mpz_t(), h.get_mpz_t(), r.get_mpz_t());
      if (powmod(a, reduced, m) != 1) break;
      h = reduced;
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Quadratic residues

int jacobi(const Integer& a_in, const Natural& n_in) {
  if (n_in <= 0 || mpz_even_p(n_in.get_mpz_t())) throw DomainError("jacobi: modulus must be odd and positive");
  Natural n = n_in;
  Natural a = mod(a_in, n);
  int result = 1;
  while (a != 0) {
    while (mpz_even_p(a.get_mpz_t())) {
      mpz_fdiv_q_2exp(a.get_mpz_t(), a.get_mpz_t(), 1);
      const auto r = mpz_fdiv_ui(n.get_mpz_t(), 8);
      if (r == 3 || r == 5) result = -result;
    }
    std::swap(a, n);
    if (mpz_fdiv_ui(a.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(n.get_mpz_t(), 4) == 3) result = -result;
    a = mod(a, n);
  }
  return n == 1 ? result : 0;
}

int legendre(const Integer& a, const Natural& q) {
  if (q < 3 || mpz_even_p(q.get_mpz_t()) || !is_prime(q)) {
    throw DomainError("legendre: " + q.get_str() + " is not an odd prime");
  }
  return jacobi(a, q);
}

// ---------------------------------------------------------------------------
// Primality

Primality primality(const Natural& n) {
  if (n < 2) return Primality::Composite;
  for (unsigned long p : kWitnessBases) {
    if (n == p) return Primality::Proven;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return Primality::Composite;
  }
  for (unsigned long base : kWitnessBases) {
    if (!strong_probable_prime(n, base)) return Primality::Composite;
  }
  if (n < two_pow_64()) return Primality::Proven;
  if (mpz_perfect_square_p(n.get_mpz_t())) return Primality::Composite;
  return strong_lucas_probable_prime(n) ? Primality::Probable : Primality::Composite;
}

bool is_prime(const Natural& n) { return primality(n) != Primality::Composite; }

Natural next_prime(const Natural& n) {
  if (n < 2) return Natural(2);
  Natural c = n + 1;
  if (c > 2 && mpz_even_p(c.get_mpz_t())) c += 1;
  while (!is_prime(c)) c += 2;
  return c;
}

Natural prev_prime(const Natural& n) {
  if (n <= 2) return Natural(0);
  if (n == 3) return Natural(2);
  Natural c = n - 1;
  if (mpz_even_p(c.get_mpz_t())) c -= 1;
  while (c >= 3 && !is_prime(c)) c -= 2;
  return c >= 3 ? c : Natural(2);
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> out;
  if (limit < 2) return out;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factorization

FactorResult factorize(const Natural& n, const FactorBudget& budget) {
  if (n < 1) throw DomainError("factorize: n must be >= 1");
  FactorResult result;
  result.seed = budget.seed;

  std::map<Natural, unsigned> found;
  Natural rest = n;

  std::vector<std::uint64_t> local;
  const std::vector<std::uint64_t>* trial = &default_trial_primes();
  if (budget.trial_limit != FactorBudget{}.trial_limit) {
    local = primes_up_to(budget.trial_limit);
    trial = &local;
  }

  bool exhausted_by_square = false;
  for (std::uint64_t p : *trial) {
    if (Natural(p) * p > rest) {
      exhausted_by_square = true;
      break;
    }
    if (!mpz_divisible_ui_p(rest.get_mpz_t(), p)) continue;
    unsigned k = 0;
    while (mpz_divisible_ui_p(rest.get_mpz_t(), p)) {
      mpz_divexact_ui(rest.get_mpz_t(), rest.get_mpz_t(), p);
      ++k;
    }
    found[Natural(p)] += k;
  }

  if (rest > 1) {
    if (exhausted_by_square) {
      found[rest] += 1;
    } else {
      std::mt19937_64 rng(budget.seed);
      std::uint64_t remaining = budget.rho_iterations;
      std::vector<Natural> pending{rest};
      while (!pending.empty()) {
        Natural m = std::move(pending.back());
        pending.pop_back();
        if (m == 1) continue;
        if (is_prime(m)) {
          found[m] += 1;
          continue;
        }
        Natural root;
        if (mpz_perfect_power_p(m.get_mpz_t())) {
          // Peel perfect powers directly; rho is slow on them.
          for (unsigned long e = mpz_sizeinbase(m.get_mpz_t(), 2); e >= 2; --e) {
            if (mpz_root(root.get_mpz_t(), m.get_mpz_t(), e) != 0) {
              for (unsigned long i = 0; i < e; ++i) pending.push_back(root);
              break;
            }
          }
          continue;
        }
        auto f = brent_rho(m, rng, remaining);
        if (!f) {
          result.residue *= m;
          result.fully_factored = false;
          continue;
        }
        Natural other;
        mpz_divexact(other.get_mpz_t(), m.get_mpz_t(), f->get_mpz_t());
        pending.push_back(*f);
        pending.push_back(other);
      }
    }
  }

  std::vector<PrimePower> pairs;
  pairs.reserve(found.size());
  for (auto& [p, k] : found) pairs.push_back(PrimePower{p, k});
  result.factors = Factorization::from_trusted_pairs(std::move(pairs));
  return result;
}

}  // namespace defiperf
