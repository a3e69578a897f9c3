#include <random>

#include "doctest.h"
#include "oracles.hpp"

#include "defiperf/errors.hpp"
#include "defiperf/oracle.hpp"

using namespace defiperf;

TEST_CASE("sigma sieve small values") {
  const auto s = sieve_sigma(10);
  CHECK(s == std::vector<std::uint64_t>{1, 3, 4, 7, 6, 12, 8, 15, 13, 18});
  CHECK_THROWS_AS(sieve_sigma(1), DomainError);
}

TEST_CASE("sigma sieve matches divisor enumeration across segment edges") {
  const std::uint64_t limit = 2 * kSegmentSize + 5000;
  const auto s = sieve_sigma(limit);
  REQUIRE(s.size() == limit);
  const auto table = oracles::sigma_table(20000);
  for (std::uint64_t n = 1; n <= 20000; ++n) REQUIRE(s[n - 1] == table[n]);
  for (std::uint64_t edge : {kSegmentSize, 2 * kSegmentSize}) {
    for (std::uint64_t n = edge - 2000; n <= edge + 2000; ++n) REQUIRE(s[n - 1] == oracles::divisor_sum(n));
  }
  std::mt19937_64 rng(43);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t n = 1 + rng() % limit;
    REQUIRE(Natural(std::to_string(s[n - 1])) == sigma(factorize(Natural(std::to_string(n))).factors));
  }
}

TEST_CASE("witnesses up to 100") {
  const auto r = enumerate_dp(100, {}, 1);
  std::vector<std::uint64_t> ns;
  for (const auto& e : r.entries) ns.push_back(e.n);
  CHECK(ns == std::vector<std::uint64_t>{2, 4, 8, 10, 16, 32, 44, 64});
  CHECK(r.entries[3].d == 2);  // sigma(10) = 18 = 20 - 2
  CHECK(r.entries[3].D == 5);
  CHECK(r.entries[3].omega == 2);
  CHECK_THROWS_AS(enumerate_dp(1), DomainError);
}

TEST_CASE("oracle witnesses satisfy the defining identity and are ordered") {
  const auto r = enumerate_dp(3'000'000, {}, 2);
  for (std::size_t i = 0; i < r.entries.size(); ++i) {
    const auto& e = r.entries[i];
    if (i > 0) REQUIRE(r.entries[i - 1].n < e.n);
    REQUIRE(e.d * e.D == e.n);
    REQUIRE(oracles::divisor_sum(e.n) == (2 * e.D - 1) * e.d);
    const auto w = dp_witness(factorize(Natural(std::to_string(e.n))).factors);
    REQUIRE(w);
    REQUIRE(verify_eq1(*w));
    REQUIRE(w->n.size() == e.omega);
    if (e.odd) {
      const std::uint64_t root = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(e.n))));
      REQUIRE(root * root == e.n);
    }
  }
}

TEST_CASE("filters and thread counts") {
  const auto all = enumerate_dp(200000, {}, 1);
  const auto multi = enumerate_dp(200000, {}, 4);
  CHECK(all.entries == multi.entries);
  const auto two = enumerate_dp(200000, {false, 2}, 3);
  for (const auto& e : two.entries) CHECK(e.omega == 2);
  std::size_t expect = 0;
  for (const auto& e : all.entries) expect += e.omega == 2;
  CHECK(two.entries.size() == expect);
  CHECK(enumerate_dp(200000, {true, std::nullopt}, 2).entries.empty());
}

TEST_CASE("csv export") {
  const auto r = enumerate_dp(20, {}, 1);
  CHECK(to_csv(r) == "n,d,D,omega,parity\n2,1,2,1,even\n4,1,4,1,even\n8,1,8,1,even\n10,2,5,2,even\n16,1,16,1,even\n");
}

TEST_CASE("cross check reports vacuous domains") {
  SearchConfig c;
  c.omega = 2;
  c.prime_min = 1000;
  c.prime_max = 1100;
  c.exponent_max = 1;
  c.rules = {false, false, false, false, false};
  const auto r = enumerate(c);
  const auto cc = cross_check(r, enumerate_dp(100, {}, 1));
  CHECK(cc.vacuous);
}
