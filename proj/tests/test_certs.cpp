#include <algorithm>
#include <random>

#include "doctest.h"

#include "defiperf/certs.hpp"
#include "defiperf/errors.hpp"

using namespace defiperf;

namespace {

FactRecord rec(FactKind k, std::string expr, std::string expected) {
  return {k, std::move(expr), std::move(expected), "", FactStatus::Unchecked, {}};
}

FactStatus status_of(FactKind k, std::string expr, std::string expected) {
  return verify_fact(rec(k, std::move(expr), std::move(expected))).status;
}

const std::string kCorpus = std::string(DEFIPERF_DATA_DIR) + "/facts.tsv";

}  // namespace

TEST_CASE("required facts") {
  CHECK(status_of(FactKind::Order, "(ord 11 25)", "5") == FactStatus::Confirmed);
  CHECK(status_of(FactKind::Divides, "(sigma 3 2)", "13") == FactStatus::Confirmed);
  CHECK(status_of(FactKind::Legendre, "(legendre 2 11)", "-1") == FactStatus::Confirmed);
  const auto open = verify_fact(rec(FactKind::Inequality, "(prod (sr 3 2) (sr 5 2) (sr 11 2) (sr 61 2))", ">2"));
  CHECK(open.status == FactStatus::Confirmed);
  const auto tail =
      verify_fact(rec(FactKind::Inequality, "(sum (prod (sr 3 2) (sup 5) (sup 11) (sup 167)) (inv 605))", "<2"));
  CHECK(tail.status == FactStatus::Confirmed);
  CHECK(tail.actual == "14459957/7230960");
}

TEST_CASE("wrong claims are refuted with the recomputed truth") {
  const auto o = verify_fact(rec(FactKind::Order, "(ord 11 25)", "10"));
  CHECK(o.status == FactStatus::Refuted);
  CHECK(o.actual == "5");
  CHECK(status_of(FactKind::NotDivides, "(sigma 3 2)", "13") == FactStatus::Refuted);
  CHECK(status_of(FactKind::Legendre, "(legendre 3 11)", "-1") == FactStatus::Refuted);
  CHECK(status_of(FactKind::Inequality, "(prod (sr 3 2) (sr 5 2))", ">2") == FactStatus::Refuted);
}

TEST_CASE("typo forms from the source text") {
  // Literal and intended versions of three printed factors.
  CHECK(status_of(FactKind::Inequality,
                  "(prod (sr 3 10) (sr 5 6) (ratio (powm1 17 3) (mul 16 (pow 17 3))) (sr 241 2))", ">2") ==
        FactStatus::Refuted);
  CHECK(status_of(FactKind::Inequality, "(prod (sr 3 10) (sr 5 6) (sr 17 2) (sr 241 2))", ">2") ==
        FactStatus::Confirmed);
  CHECK(evaluate_rational("(ratio (powm1 13 3) (mul 10 (pow 13 2)))") == Rational(2196, 1690));
  CHECK(evaluate_rational("(ratio (sub (pow 3 7) 2) (mul 2 (pow 3 6)))") == Rational(2185, 1458));
}

TEST_CASE("undefined expressions are refuted, malformed ones are parse errors") {
  const auto u = verify_fact(rec(FactKind::Order, "(ord 5 25)", "1"));
  CHECK(u.status == FactStatus::Refuted);
  CHECK(u.actual.rfind("undefined:", 0) == 0);
  CHECK(verify_fact(rec(FactKind::Inequality, "(inv 0)", "<2")).status == FactStatus::Refuted);
  CHECK(verify_fact(rec(FactKind::Divides, "(sigma 4 2)", "3")).status == FactStatus::Refuted);
  CHECK(verify_fact(rec(FactKind::Legendre, "(legendre 2 2)", "0")).status == FactStatus::Refuted);
  try {
    verify_fact(rec(FactKind::Inequality, "(prod (sr 3 2) (sr 5 2)", ">2"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.column() > 0);
  }
  CHECK_THROWS_AS(verify_fact(rec(FactKind::Inequality, "(frob 3)", ">2")), ParseError);
  CHECK_THROWS_AS(verify_fact(rec(FactKind::Inequality, "(sr 3 2)", "=2")), ParseError);
}

TEST_CASE("DIVIDES by modular evaluation agrees with factorization") {
  for (unsigned long p = 2; p <= 50; ++p) {
    if (!is_prime(p)) continue;
    for (unsigned e = 1; e <= 20; ++e) {
      const Natural v = defiperf::pow(Natural(p), e) - 1;
      const auto f = factorize(v);
      REQUIRE(f.fully_factored);
      for (unsigned long q = 2; q < 400; ++q) {
        if (!is_prime(q)) continue;
        const bool divides = f.factors.exponent_of(q) > 0;
        const std::string expr = "(powm1 " + std::to_string(p) + " " + std::to_string(e) + ")";
        REQUIRE(status_of(FactKind::Divides, expr, std::to_string(q)) ==
                (divides ? FactStatus::Confirmed : FactStatus::Refuted));
      }
      for (const auto& pp : f.factors.factors()) {
        const std::string expr = "(powm1 " + std::to_string(p) + " " + std::to_string(e) + ")";
        REQUIRE(status_of(FactKind::Divides, expr, pp.p.get_str()) == FactStatus::Confirmed);
      }
    }
  }
}

TEST_CASE("sigma modular evaluation matches the exact value") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 2000; ++i) {
    const unsigned long p = next_prime(rng() % 300).get_ui();
    const unsigned a = static_cast<unsigned>(rng() % 30);
    const unsigned long q = 1 + rng() % 1000;
    const bool divides = sigma_prime_power(p, a) % q == 0;
    const std::string expr = "(sigma " + std::to_string(p) + " " + std::to_string(a) + ")";
    REQUIRE(status_of(FactKind::Divides, expr, std::to_string(q)) ==
            (divides ? FactStatus::Confirmed : FactStatus::Refuted));
  }
}

TEST_CASE("fixture text: empty, garbage, columns") {
  const auto empty = verify_fixture_text("");
  CHECK(empty.records.empty());
  CHECK(empty.confirmed == 0);
  CHECK(empty.refuted == 0);
  CHECK(empty.parse_errors.empty());
  CHECK(empty.clean_under_typo_ledger());

  const auto garbage = verify_fixture_text("hello world\n");
  REQUIRE(garbage.parse_errors.size() == 1);
  CHECK(garbage.parse_errors[0].line == 1);

  const auto bad = verify_fixture_text("# c\n\nORDER\t(ord 11 25)\t5\tx\nORDER\t(ord 11 25\t5\ty\n");
  CHECK(bad.confirmed == 1);
  REQUIRE(bad.parse_errors.size() == 1);
  CHECK(bad.parse_errors[0].line == 4);
  CHECK(bad.parse_errors[0].column == 7);  // the unclosed paren

  const auto missing = verify_fixture_file("/nonexistent/facts.tsv");
  REQUIRE(missing.parse_errors.size() == 1);
  CHECK(missing.parse_errors[0].line == 0);
}

TEST_CASE("fixture verification does not depend on record order") {
  const auto base = verify_fixture_file(kCorpus);
  REQUIRE(base.parse_errors.empty());
  std::vector<std::string> lines;
  for (const auto& r : base.records) {
    lines.push_back(std::string(to_string(r.kind)) + "\t" + r.expr + "\t" + r.expected + "\t" + r.locus);
  }
  std::mt19937_64 rng(29);
  std::shuffle(lines.begin(), lines.end(), rng);
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  const auto shuffled = verify_fixture_text(text);
  CHECK(shuffled.confirmed == base.confirmed);
  CHECK(shuffled.refuted == base.refuted);
  for (const auto& r : shuffled.records) {
    const auto it = std::find_if(base.records.begin(), base.records.end(), [&](const FactRecord& b) {
      return b.expr == r.expr && b.expected == r.expected && b.locus == r.locus;
    });
    REQUIRE(it != base.records.end());
    CHECK(it->status == r.status);
    CHECK(it->actual == r.actual);
  }
}

TEST_CASE("shipped corpus is clean under the typo ledger") {
  const auto s = verify_fixture_file(kCorpus);
  CHECK(s.parse_errors.empty());
  CHECK(s.records.size() >= 40);
  CHECK(s.clean_under_typo_ledger());
  for (auto k : {FactKind::Order, FactKind::Divides, FactKind::NotDivides, FactKind::Legendre,
                 FactKind::Inequality}) {
    CHECK(std::any_of(s.records.begin(), s.records.end(), [&](const FactRecord& r) { return r.kind == k; }));
  }
  // Each literal typo form has a confirmed partner at the same locus.
  for (const auto& r : s.records) {
    const auto pos = r.locus.find(kTypoLiteralTag);
    if (pos == std::string::npos) continue;
    const std::string site = r.locus.substr(0, pos);
    CHECK(std::any_of(s.records.begin(), s.records.end(), [&](const FactRecord& o) {
      return &o != &r && o.locus.rfind(site, 0) == 0 && o.status == FactStatus::Confirmed;
    }));
  }
}

TEST_CASE("builders produce verifiable records") {
  CHECK(verify_fact(fact_order(11, 25, 5)).status == FactStatus::Confirmed);
  CHECK(verify_fact(fact_divides_sigma(5, 11, 4)).status == FactStatus::Confirmed);
  CHECK(verify_fact(fact_legendre(2, 11, -1)).status == FactStatus::Confirmed);
  CHECK(verify_fact(fact_inequality("(sr 3 2)", false)).status == FactStatus::Confirmed);
}
