#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "defiperf/ntcore.hpp"
#include "defiperf/rational.hpp"

namespace defiperf {

enum class FactKind { Order, Divides, NotDivides, Legendre, Inequality };
enum class FactStatus { Unchecked, Confirmed, Refuted };

std::string_view to_string(FactKind kind);
std::string_view to_string(FactStatus status);
FactKind parse_fact_kind(std::string_view text);
FactStatus parse_fact_status(std::string_view text);

/// One concrete numeric claim.
///
/// expr uses a small prefix grammar. Integer forms:
///   N  (pow p e)  (powm1 p e)  (sigma p a)  (mul x ...)  (add x ...)  (sub x y)
/// Rational forms (an integer form is also a rational):
///   (sr p a) = sigma(p^a)/p^a   (sup p) = p/(p-1)   (ratio x y)   (inv x)
///   (prod x ...)   (sum x ...)
/// Kind-specific heads: ORDER takes (ord a m), LEGENDRE takes (legendre a q).
///
/// expected: the order, the divisor q, the symbol value, or ">2" / "<2".
struct FactRecord {
  FactKind kind = FactKind::Divides;
  std::string expr;
  std::string expected;
  std::string locus;
  FactStatus status = FactStatus::Unchecked;
  /// Recomputed truth, filled by verify_fact (e.g. "4123/2025" or "5").
  std::string actual;

  bool operator==(const FactRecord&) const = default;
};

/// Evaluates the record exactly and sets status and actual. Malformed
/// expressions throw ParseError (line 0, column within expr).
FactRecord verify_fact(FactRecord f);

/// Exact value of a rational-valued expression.
Rational evaluate_rational(std::string_view expr);

// Builders used by prune certificates.
FactRecord fact_order(const Natural& a, const Natural& m, const Natural& value, std::string locus = {});
FactRecord fact_divides_sigma(const Natural& q, const Natural& p, unsigned a, std::string locus = {});
FactRecord fact_legendre(const Integer& a, const Natural& q, int value, std::string locus = {});
FactRecord fact_inequality(std::string expr, bool above_two, std::string locus = {});

struct FixtureError {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;

  bool operator==(const FixtureError&) const = default;
};

/// Ledger tags carried in the locus field of fixture records.
inline constexpr std::string_view kTypoLiteralTag = "typo:literal";
inline constexpr std::string_view kTypoIntentTag = "typo:intent";

struct FixtureSummary {
  std::vector<FactRecord> records;
  std::size_t confirmed = 0;
  std::size_t refuted = 0;
  std::vector<FixtureError> parse_errors;

  /// Every record Confirmed, except literal typo forms, which must be
  /// Refuted; no parse errors.
  bool clean_under_typo_ledger() const;

  bool operator==(const FixtureSummary&) const = default;
};

FixtureSummary verify_fixture_text(std::string_view text);
/// Unreadable file is reported as a single parse error at line 0.
FixtureSummary verify_fixture_file(const std::string& path);

}  // namespace defiperf
