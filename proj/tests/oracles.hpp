#pragma once

// Slow reference implementations used only to check the library.

#include <cstdint>
#include <numeric>
#include <vector>

namespace oracles {

inline std::uint64_t divisor_sum(std::uint64_t n) {
  std::uint64_t s = 0;
  for (std::uint64_t i = 1; i * i <= n; ++i) {
    if (n % i == 0) {
      s += i;
      if (i != n / i) s += n / i;
    }
  }
  return s;
}

inline std::vector<std::uint64_t> divisors(std::uint64_t n) {
  std::vector<std::uint64_t> lo, hi;
  for (std::uint64_t i = 1; i * i <= n; ++i) {
    if (n % i == 0) {
      lo.push_back(i);
      if (i != n / i) hi.push_back(n / i);
    }
  }
  lo.insert(lo.end(), hi.rbegin(), hi.rend());
  return lo;
}

inline bool is_prime_td(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t i = 2; i * i <= n; ++i)
    if (n % i == 0) return false;
  return true;
}

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod(r, b, m);
    b = mulmod(b, b, m);
    e >>= 1;
  }
  return r;
}

// Order by stepping through powers.
inline std::uint64_t order_by_steps(std::uint64_t a, std::uint64_t m) {
  std::uint64_t x = a % m, h = 1;
  while (x != 1 % m) {
    x = mulmod(x, a, m);
    ++h;
  }
  return h;
}

// Legendre symbol from the list of squares mod q.
inline int legendre_by_squares(std::int64_t a, std::uint64_t q) {
  const std::uint64_t r = static_cast<std::uint64_t>(((a % static_cast<std::int64_t>(q)) + q) % q);
  if (r == 0) return 0;
  for (std::uint64_t x = 1; x <= q / 2; ++x)
    if (x * x % q == r) return 1;
  return -1;
}

// sigma(1..limit) by summing every divisor into its multiples.
inline std::vector<std::uint64_t> sigma_table(std::uint64_t limit) {
  std::vector<std::uint64_t> s(limit + 1, 0);
  for (std::uint64_t i = 1; i <= limit; ++i)
    for (std::uint64_t j = i; j <= limit; j += i) s[j] += i;
  return s;
}

}  // namespace oracles
