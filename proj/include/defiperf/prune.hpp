#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "defiperf/certs.hpp"
#include "defiperf/ntcore.hpp"
#include "defiperf/rational.hpp"

namespace defiperf {

/// Admissible exponents: min..max (max absent = unbounded), optionally
/// restricted to even values. Fixed when max == min.
struct ExponentRange {
  unsigned min = 1;
  std::optional<unsigned> max;
  bool even_only = false;

  static ExponentRange fixed(unsigned a) { return {a, a, false}; }
  bool is_fixed() const { return max && *max == min; }
  bool bounded() const { return max.has_value(); }
  bool contains(unsigned a) const {
    return a >= min && (!max || a <= *max) && (!even_only || a % 2 == 0);
  }

  bool operator==(const ExponentRange&) const = default;
};

/// What is known about beta_i = alpha_i - e_i, the exponent of p_i in d.
enum class BetaStatus { Unknown, Zero, Positive };

/// Primes not yet chosen: `count` distinct primes from [min_prime, max_prime],
/// all sharing one exponent range.
struct OpenSlots {
  unsigned count = 0;
  Natural min_prime;
  std::optional<Natural> max_prime;
  ExponentRange exponents;

  bool operator==(const OpenSlots&) const = default;
};

/// Known restrictions on the codivisor D = n / d.
struct DConstraints {
  Natural lower_bound{2};
  std::optional<Natural> upper_bound;
  /// D = residue (mod modulus); modulus 1 means no congruence.
  Natural modulus{1};
  Natural residue{0};
  /// Primes q known to divide 2D - 1 (already folded into the congruence).
  std::vector<Natural> forced;
  bool contradictory = false;

  bool operator==(const DConstraints&) const = default;
};

struct SubtreeSpec {
  std::vector<Natural> primes;  // strictly ascending
  std::vector<ExponentRange> exponents;
  std::vector<BetaStatus> beta;
  std::optional<OpenSlots> open;
  DConstraints d_constraints;
  /// Bound only sigma(n)/n, with no 1/D term.
  bool abundancy_only = false;

  bool operator==(const SubtreeSpec&) const = default;
};

/// Throws DomainError when the shape invariants fail.
void validate(const SubtreeSpec& spec);

struct RuleToggles {
  bool bound = true;
  bool forced = true;
  bool order = true;
  bool qr = true;
  /// Fault injection: prune exactly when the QR rule should not.
  bool invert_qr = false;

  bool operator==(const RuleToggles&) const = default;
};

/// Factorizations of sigma(p^a), shared between threads.
class SigmaFactorCache {
 public:
  explicit SigmaFactorCache(FactorBudget budget = {}) : budget_(budget) {}
  const FactorResult& get(const Natural& p, unsigned a);
  const FactorBudget& budget() const { return budget_; }

 private:
  FactorBudget budget_;
  std::mutex mutex_;
  std::map<std::pair<Natural, unsigned>, std::unique_ptr<FactorResult>> entries_;
};

struct RuleContext {
  RuleToggles toggles;
  /// Largest D-set materialized explicitly; above it D is bounded through
  /// its congruence class only.
  std::size_t d_enum_limit = 20000;
  SigmaFactorCache* cache = nullptr;  // null: a private cache per call
};

enum class PruneRule {
  BoundAboveTwo,
  BoundBelowTwo,
  OrderContradiction,
  ForcedDivisorContradiction,
  QuadraticResidueContradiction,
};

std::string_view to_string(PruneRule rule);
PruneRule parse_prune_rule(std::string_view text);

struct PruneCertificate {
  PruneRule rule = PruneRule::BoundAboveTwo;
  SubtreeSpec spec;
  std::vector<FactRecord> facts;
  std::vector<std::pair<std::string, std::string>> exact_values;
  /// Primes >= 2^64 the decision relied on (probable, not proven).
  std::vector<Natural> probable_primes;

  bool operator==(const PruneCertificate&) const = default;
};

struct BoundInterval {
  Rational lo;
  Rational hi;
  /// Expressions in the fact grammar whose values are lo and hi.
  std::string lo_expr;
  std::string hi_expr;
};

/// Bounds of sigma(n)/n + 1/D over all completions. Throws
/// ContradictionError when the spec has no completion.
BoundInterval bound_interval(const SubtreeSpec& spec, const RuleContext& ctx = {});
std::optional<PruneCertificate> prune_by_bounds(const SubtreeSpec& spec, const RuleContext& ctx = {});

/// q | sigma(p^a) decided through the order of p mod q. Throws DomainError
/// when q == p or q is not prime.
bool sigma_divisibility(const Natural& q, const Natural& p, unsigned a);

struct ForcedDivisor {
  Natural q;
  Natural p;  // source prime power p^a with q | sigma(p^a)
  unsigned a = 0;
};

struct ForcedResult {
  std::vector<ForcedDivisor> divisors;
  DConstraints merged;  // spec constraints with every q | 2D - 1 folded in
  bool contradiction = false;
};

/// Primes outside the support that divide sigma(p^a) for a fixed p^a.
ForcedResult forced_divisors(const SubtreeSpec& spec, const RuleContext& ctx = {});

using ParityVector = std::vector<unsigned char>;

/// Beta-parity vectors b with prod (p_i/q)^b_i = (2/q).
std::vector<ParityVector> qr_admissible_parities(const std::vector<Natural>& primes, const Natural& q);
/// Same, keeping only vectors compatible with the beta restrictions
/// (BetaStatus::Zero forces parity 0).
std::vector<ParityVector> qr_admissible_parities(const std::vector<Natural>& primes, const Natural& q,
                                                 const std::vector<BetaStatus>& beta);

/// Given m | alpha + 1 for the exponent of spec.primes[index], pushes the
/// out-of-support prime factors of sigma(p^(m-1)) into 2D - 1 and reports a
/// certificate if the D constraints can no longer be met.
std::optional<PruneCertificate> order_contradiction(const SubtreeSpec& spec, std::size_t index, unsigned m,
                                                    const RuleContext& ctx = {});
/// The forced divisors behind order_contradiction, for callers that want
/// the propagation without the verdict.
ForcedResult order_forced_divisors(const SubtreeSpec& spec, std::size_t index, unsigned m,
                                   const RuleContext& ctx = {});

/// All enabled rules in the order bound, forced divisor, order, QR.
std::optional<PruneCertificate> apply_rules(const SubtreeSpec& spec, const RuleContext& ctx = {});

}  // namespace defiperf
