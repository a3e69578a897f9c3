#include "defiperf/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// sigma over [lo, hi], lo >= 1: every divisor pair (d, m/d) with d <= sqrt(m)
// is added once from the small side.
void sigma_segment(std::uint64_t lo, std::uint64_t hi, std::vector<std::uint64_t>& out) {
  out.assign(hi - lo + 1, 0);
  const std::uint64_t root = isqrt(hi);
  for (std::uint64_t d = 1; d <= root; ++d) {
    const std::uint64_t sq = d * d;
    std::uint64_t m = std::max(sq, (lo + d - 1) / d * d);
    for (; m <= hi; m += d) {
      const std::uint64_t co = m / d;
      out[m - lo] += co == d ? d : d + co;
    }
  }
}

// omega over [lo, hi] by dividing out the sieving primes.
void omega_segment(std::uint64_t lo, std::uint64_t hi, const std::vector<std::uint64_t>& primes,
                   std::vector<unsigned char>& omega) {
  const std::size_t len = hi - lo + 1;
  std::vector<std::uint64_t> rest(len);
  for (std::size_t i = 0; i < len; ++i) rest[i] = lo + i;
  omega.assign(len, 0);
  for (auto p : primes) {
    if (p * p > hi) break;
    for (std::uint64_t m = (lo + p - 1) / p * p; m <= hi; m += p) {
      auto& r = rest[m - lo];
      ++omega[m - lo];
      do r /= p; while (r % p == 0);
    }
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (rest[i] > 1) ++omega[i];
  }
}

std::uint64_t sigma_by_trial_division(std::uint64_t n) {
  std::uint64_t s = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    std::uint64_t term = 1, pk = 1;
    while (n % p == 0) {
      n /= p;
      pk *= p;
      term += pk;
    }
    s *= term;
  }
  if (n > 1) s *= n + 1;
  return s;
}

unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DEFIPERF_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(n, tasks)));
}

Factorization factor_small(std::uint64_t n) { return factorize(Natural(static_cast<unsigned long>(n))).factors; }

}  // namespace

std::vector<std::uint64_t> sieve_sigma(std::uint64_t limit) {
  if (limit < 2) throw DomainError("sieve limit must be >= 2");
  std::vector<std::uint64_t> all;
  all.reserve(limit);
  std::vector<std::uint64_t> seg;
  for (std::uint64_t lo = 1; lo <= limit; lo += kSegmentSize) {
    const std::uint64_t hi = std::min(limit, lo + kSegmentSize - 1);
    sigma_segment(lo, hi, seg);
    all.insert(all.end(), seg.begin(), seg.end());
  }
  return all;
}

SieveResult enumerate_dp(std::uint64_t limit, SieveFilters filters, unsigned threads) {
  if (limit < 2) throw DomainError("sieve limit must be >= 2");
  if (limit > (std::uint64_t{1} << 40)) throw DomainError("sieve limit too large");
  SieveResult res;
  res.limit = limit;
  res.filters = filters;
  const auto small_primes = primes_up_to(isqrt(limit) + 1);

  const std::size_t nseg = (limit + kSegmentSize - 1) / kSegmentSize;
  std::vector<std::vector<SieveEntry>> found(nseg);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    std::vector<std::uint64_t> sig;
    std::vector<unsigned char> om;
    for (;;) {
      const std::size_t s = next.fetch_add(1);
      if (s >= nseg) break;
      const std::uint64_t lo = 1 + s * kSegmentSize;
      const std::uint64_t hi = std::min(limit, lo + kSegmentSize - 1);
      sigma_segment(lo, hi, sig);
      omega_segment(lo, hi, small_primes, om);
      for (std::uint64_t n = std::max<std::uint64_t>(lo, 2); n <= hi; ++n) {
        const std::uint64_t sg = sig[n - lo];
        if (sg >= 2 * n) continue;
        const std::uint64_t delta = 2 * n - sg;
        if (delta >= n || n % delta != 0) continue;
        const bool odd = n % 2 == 1;
        if (filters.odd_only && !odd) continue;
        if (filters.omega_equals && om[n - lo] != *filters.omega_equals) continue;
        found[s].push_back({n, delta, n / delta, om[n - lo], odd});
      }
    }
  };
  const unsigned nthreads = worker_count(threads, nseg);
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& f : found) res.entries.insert(res.entries.end(), f.begin(), f.end());

  for (const auto& e : res.entries) {
    const std::uint64_t s = sigma_by_trial_division(e.n);
    if (s != 2 * e.n - e.d || e.n % e.d != 0 || e.d * e.D != e.n) {
      throw IntegrityError("sieve entry " + std::to_string(e.n) + " fails the trial-division recheck");
    }
  }
  return res;
}

CrossCheck cross_check(const SearchReport& report, const SieveResult& sieve) {
  CrossCheck out;
  const auto& cfg = report.config;
  auto in_sieve_domain = [&](const Factorization& f) {
    const Natural n = f.value();
    if (n > sieve.limit) return false;
    if (sieve.filters.odd_only && mpz_even_p(n.get_mpz_t())) return false;
    if (sieve.filters.omega_equals && f.size() != *sieve.filters.omega_equals) return false;
    return true;
  };

  // Overlap test: the smallest shape value must fit under the limit and the
  // filters must not exclude every shape.
  const auto grid = exponent_grid(cfg);
  Natural least(1);
  Natural p = cfg.prime_min - 1;
  if (cfg.odd_only && p < 2) p = 2;
  for (unsigned i = 0; i < cfg.omega; ++i) {
    p = next_prime(p);
    least *= pow(p, grid.front());
  }
  const bool omega_clash = sieve.filters.omega_equals && *sieve.filters.omega_equals != cfg.omega;
  if (least > sieve.limit || omega_clash || (cfg.value_max && *cfg.value_max < least)) {
    out.vacuous = true;
    out.diagnostic = "warning: search and sieve domains do not overlap";
    return out;
  }

  std::vector<Natural> engine, oracle;
  for (const auto& w : report.witnesses) {
    if (in_sieve_domain(w.n)) engine.push_back(w.n.value());
  }
  for (const auto& e : sieve.entries) {
    const Factorization f = factor_small(e.n);
    if (in_shape_domain(cfg, f)) oracle.push_back(f.value());
  }
  std::sort(engine.begin(), engine.end());
  std::sort(oracle.begin(), oracle.end());
  std::set_difference(engine.begin(), engine.end(), oracle.begin(), oracle.end(), std::back_inserter(out.engine_only));
  std::set_difference(oracle.begin(), oracle.end(), engine.begin(), engine.end(), std::back_inserter(out.sieve_only));
  out.agree = out.engine_only.empty() && out.sieve_only.empty();
  if (!out.agree) {
    std::string d = "mismatch:";
    for (const auto& n : out.engine_only) d += " engine-only " + n.get_str();
    for (const auto& n : out.sieve_only) d += " sieve-only " + n.get_str();
    out.diagnostic = d;
  }
  if (!report.complete) out.diagnostic += (out.diagnostic.empty() ? "" : "; ") + std::string("warning: search report is incomplete");
  return out;
}

std::string to_csv(const SieveResult& sieve) {
  std::string out = "n,d,D,omega,parity\n";
  for (const auto& e : sieve.entries) {
    out += std::to_string(e.n) + "," + std::to_string(e.d) + "," + std::to_string(e.D) + "," +
           std::to_string(e.omega) + "," + (e.odd ? "odd" : "even") + "\n";
  }
  return out;
}

}  // namespace defiperf
