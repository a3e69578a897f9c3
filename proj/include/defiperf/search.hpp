#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "defiperf/defperf.hpp"
#include "defiperf/prune.hpp"

namespace defiperf {

inline constexpr std::string_view kEngineVersion = "1.0.0";
inline constexpr std::string_view kPresetS5 = "paper-s5";

struct SearchConfig {
  unsigned omega = 4;
  bool odd_only = false;
  Natural prime_min{2};
  Natural prime_max{300};
  /// Exponent grid is {2, 4, ..., exponent_max} when odd_only, else {1..max}.
  unsigned exponent_max = 16;
  std::optional<Natural> value_max;
  /// "paper-s5": p1 = 3 and p2 in {5, 7, 11, 13, 17}.
  std::optional<std::string> preset;
  RuleToggles rules;
  std::size_t d_enum_limit = 20000;
  std::uint64_t seed = FactorBudget{}.seed;
  std::optional<std::uint64_t> leaf_budget;
  std::optional<std::uint64_t> time_budget_ms;
  bool trace = false;
  /// 0 = hardware concurrency, further capped by DEFIPERF_THREADS.
  unsigned threads = 0;

  bool operator==(const SearchConfig&) const = default;
};

/// Throws DomainError on an unusable config (omega 0, empty prime range, ...).
void validate(const SearchConfig& config);

std::vector<unsigned> exponent_grid(const SearchConfig& config);

struct SearchReport {
  SearchConfig config;
  std::string engine_version{kEngineVersion};
  std::vector<DPWitness> witnesses;  // ascending by n
  std::vector<PruneCertificate> certificates;
  /// Every grid leaf is counted in exactly one of evaluated, pruned and
  /// out_of_range (the last one only when value_max is set). Leaves under a
  /// truncated run's unvisited subtrees are in none of them.
  std::uint64_t grid_leaves = 0;
  std::uint64_t leaves_evaluated = 0;
  std::uint64_t leaves_pruned = 0;
  std::uint64_t leaves_out_of_range = 0;
  std::uint64_t subtrees_pruned = 0;
  bool complete = true;
  std::vector<std::string> trace;

  bool operator==(const SearchReport&) const = default;
};

SearchReport enumerate(const SearchConfig& config);

std::optional<DPWitness> evaluate_leaf(const std::vector<Natural>& primes, const std::vector<unsigned>& exponents);

/// True when n has the shape the config enumerates.
bool in_shape_domain(const SearchConfig& config, const Factorization& n);

/// Re-verifies every witness and certificate of the report. Throws
/// IntegrityError naming the first item that fails.
bool replay(const SearchReport& report);

struct AuditResult {
  bool finite = false;        // all completions bounded
  bool audited = false;       // finite and within the completion limit
  std::uint64_t completions = 0;
  std::optional<DPWitness> counterexample;
};

/// Evaluates every completion of the certificate's subtree (when there are
/// at most `limit`) and looks for a witness the certificate excluded.
AuditResult audit_certificate(const PruneCertificate& cert, std::uint64_t limit = 1'000'000);

}  // namespace defiperf
