#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "defiperf/search.hpp"

namespace defiperf {

struct SieveEntry {
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::uint64_t D = 0;
  unsigned omega = 0;
  bool odd = false;

  bool operator==(const SieveEntry&) const = default;
};

struct SieveFilters {
  bool odd_only = false;
  std::optional<unsigned> omega_equals;

  bool operator==(const SieveFilters&) const = default;
};

struct SieveResult {
  std::uint64_t limit = 0;
  SieveFilters filters;
  std::vector<SieveEntry> entries;  // ascending by n

  bool operator==(const SieveResult&) const = default;
};

inline constexpr std::uint64_t kSegmentSize = std::uint64_t{1} << 20;

/// sigma(1..limit); element i holds sigma(i + 1). Requires limit >= 2.
std::vector<std::uint64_t> sieve_sigma(std::uint64_t limit);

/// Every n <= limit with 2n - sigma(n) a proper divisor of n. Each entry is
/// rechecked by trial division before it is reported. threads = 0 picks
/// the hardware count, capped by DEFIPERF_THREADS.
SieveResult enumerate_dp(std::uint64_t limit, SieveFilters filters = {}, unsigned threads = 0);

struct CrossCheck {
  bool agree = true;
  bool vacuous = false;  // the two domains do not overlap
  std::vector<Natural> engine_only;
  std::vector<Natural> sieve_only;
  std::string diagnostic;
};

/// Compares witness sets on the intersection of the search's shape domain
/// and the sieve's domain (n <= limit, sieve filters).
CrossCheck cross_check(const SearchReport& report, const SieveResult& sieve);

/// CSV with header n,d,D,omega,parity.
std::string to_csv(const SieveResult& sieve);

}  // namespace defiperf
