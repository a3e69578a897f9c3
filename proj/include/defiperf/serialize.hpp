#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "defiperf/certs.hpp"
#include "defiperf/defperf.hpp"
#include "defiperf/oracle.hpp"
#include "defiperf/prune.hpp"
#include "defiperf/search.hpp"

namespace defiperf {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

// Big integers travel as decimal strings; factorizations as [[p, a], ...].
Json natural_to_json(const Natural& n);
Natural natural_from_json(const Json& j);

void to_json(Json& j, const Factorization& f);
void from_json(const Json& j, Factorization& f);
void to_json(Json& j, const DPWitness& w);
void from_json(const Json& j, DPWitness& w);

void to_json(Json& j, const ExponentRange& r);
void from_json(const Json& j, ExponentRange& r);
void to_json(Json& j, const OpenSlots& o);
void from_json(const Json& j, OpenSlots& o);
void to_json(Json& j, const DConstraints& d);
void from_json(const Json& j, DConstraints& d);
void to_json(Json& j, const SubtreeSpec& s);
void from_json(const Json& j, SubtreeSpec& s);
void to_json(Json& j, const RuleToggles& t);
void from_json(const Json& j, RuleToggles& t);
void to_json(Json& j, const FactRecord& f);
void from_json(const Json& j, FactRecord& f);
void to_json(Json& j, const PruneCertificate& c);
void from_json(const Json& j, PruneCertificate& c);

/// The thread count is a machine property and is left out.
void to_json(Json& j, const SearchConfig& c);
void from_json(const Json& j, SearchConfig& c);
void to_json(Json& j, const SearchReport& r);
void from_json(const Json& j, SearchReport& r);

void to_json(Json& j, const SieveEntry& e);
void from_json(const Json& j, SieveEntry& e);
void to_json(Json& j, const SieveFilters& f);
void from_json(const Json& j, SieveFilters& f);
void to_json(Json& j, const SieveResult& r);
void from_json(const Json& j, SieveResult& r);

void to_json(Json& j, const FixtureError& e);
void from_json(const Json& j, FixtureError& e);
void to_json(Json& j, const FixtureSummary& s);
void from_json(const Json& j, FixtureSummary& s);

/// One self-describing document per CLI run.
struct RunRecord {
  int schema_version = kSchemaVersion;
  std::string engine_version{kEngineVersion};
  std::vector<std::string> command;
  Json config = Json::object();
  std::string timestamp;
  /// "witness", "non_witness", "search_report", "sieve_result" or "fact_summary".
  std::string payload_type;
  Json payload;
  int exit_status = 0;

  bool operator==(const RunRecord&) const = default;
};

void to_json(Json& j, const RunRecord& r);
void from_json(const Json& j, RunRecord& r);

}  // namespace defiperf
