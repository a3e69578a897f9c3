#include "defiperf/serialize.hpp"

#include "defiperf/errors.hpp"

namespace defiperf {

namespace {

template <typename T>
Json opt_to_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> opt_from_json(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

Json opt_nat(const std::optional<Natural>& v) { return v ? natural_to_json(*v) : Json(nullptr); }

std::optional<Natural> opt_nat_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return natural_from_json(j.at(key));
}

Json nat_list(const std::vector<Natural>& v) {
  Json a = Json::array();
  for (const auto& n : v) a.push_back(natural_to_json(n));
  return a;
}

std::vector<Natural> nat_list_from(const Json& j) {
  std::vector<Natural> out;
  for (const auto& e : j) out.push_back(natural_from_json(e));
  return out;
}

std::string_view beta_name(BetaStatus b) {
  switch (b) {
    case BetaStatus::Unknown: return "unknown";
    case BetaStatus::Zero: return "zero";
    case BetaStatus::Positive: return "positive";
  }
  return "unknown";
}

BetaStatus beta_from(const std::string& s) {
  if (s == "unknown") return BetaStatus::Unknown;
  if (s == "zero") return BetaStatus::Zero;
  if (s == "positive") return BetaStatus::Positive;
  throw DomainError("unknown beta status '" + s + "'");
}

}  // namespace

Json natural_to_json(const Natural& n) { return n.get_str(); }

Natural natural_from_json(const Json& j) {
  if (j.is_number_unsigned()) return Natural(static_cast<unsigned long>(j.get<std::uint64_t>()));
  const auto s = j.get<std::string>();
  if (!s.empty() && s.front() == '-') return Natural(-parse_natural(std::string_view(s).substr(1)));
  return parse_natural(s);
}

void to_json(Json& j, const Factorization& f) {
  j = Json::array();
  for (const auto& [p, a] : f.factors()) j.push_back(Json::array({natural_to_json(p), a}));
}

void from_json(const Json& j, Factorization& f) {
  std::vector<PrimePower> pp;
  for (const auto& e : j) pp.push_back({natural_from_json(e.at(0)), e.at(1).get<unsigned>()});
  f = Factorization::from_pairs(std::move(pp));
}

void to_json(Json& j, const DPWitness& w) {
  j = Json{{"n", natural_to_json(w.n.value())},
           {"d", natural_to_json(w.d.value())},
           {"D", natural_to_json(w.D.value())},
           {"sigma", natural_to_json(w.sigma_n)},
           {"n_factors", w.n},
           {"d_factors", w.d},
           {"D_factors", w.D}};
}

void from_json(const Json& j, DPWitness& w) {
  w.n = j.at("n_factors").get<Factorization>();
  w.d = j.at("d_factors").get<Factorization>();
  w.D = j.at("D_factors").get<Factorization>();
  w.sigma_n = natural_from_json(j.at("sigma"));
  if (w.n.value() != natural_from_json(j.at("n")) || w.d.value() != natural_from_json(j.at("d")) ||
      w.D.value() != natural_from_json(j.at("D"))) {
    throw IntegrityError("witness record: values disagree with their factorizations");
  }
}

void to_json(Json& j, const ExponentRange& r) {
  j = Json{{"min", r.min}, {"max", opt_to_json(r.max)}, {"even_only", r.even_only}};
}

void from_json(const Json& j, ExponentRange& r) {
  r.min = j.at("min").get<unsigned>();
  r.max = opt_from_json<unsigned>(j, "max");
  r.even_only = j.at("even_only").get<bool>();
}

void to_json(Json& j, const OpenSlots& o) {
  j = Json{{"count", o.count},
           {"min_prime", natural_to_json(o.min_prime)},
           {"max_prime", opt_nat(o.max_prime)},
           {"exponents", o.exponents}};
}

void from_json(const Json& j, OpenSlots& o) {
  o.count = j.at("count").get<unsigned>();
  o.min_prime = natural_from_json(j.at("min_prime"));
  o.max_prime = opt_nat_from(j, "max_prime");
  o.exponents = j.at("exponents").get<ExponentRange>();
}

void to_json(Json& j, const DConstraints& d) {
  j = Json{{"lower_bound", natural_to_json(d.lower_bound)},
           {"upper_bound", opt_nat(d.upper_bound)},
           {"modulus", natural_to_json(d.modulus)},
           {"residue", natural_to_json(d.residue)},
           {"forced", nat_list(d.forced)},
           {"contradictory", d.contradictory}};
}

void from_json(const Json& j, DConstraints& d) {
  d.lower_bound = natural_from_json(j.at("lower_bound"));
  d.upper_bound = opt_nat_from(j, "upper_bound");
  d.modulus = natural_from_json(j.at("modulus"));
  d.residue = natural_from_json(j.at("residue"));
  d.forced = nat_list_from(j.at("forced"));
  d.contradictory = j.at("contradictory").get<bool>();
}

void to_json(Json& j, const SubtreeSpec& s) {
  Json beta = Json::array();
  for (auto b : s.beta) beta.push_back(beta_name(b));
  j = Json{{"primes", nat_list(s.primes)},
           {"exponents", s.exponents},
           {"beta", beta},
           {"open", s.open ? Json(*s.open) : Json(nullptr)},
           {"d_constraints", s.d_constraints},
           {"abundancy_only", s.abundancy_only}};
}

void from_json(const Json& j, SubtreeSpec& s) {
  s.primes = nat_list_from(j.at("primes"));
  s.exponents = j.at("exponents").get<std::vector<ExponentRange>>();
  s.beta.clear();
  for (const auto& b : j.at("beta")) s.beta.push_back(beta_from(b.get<std::string>()));
  s.open = opt_from_json<OpenSlots>(j, "open");
  s.d_constraints = j.at("d_constraints").get<DConstraints>();
  s.abundancy_only = j.at("abundancy_only").get<bool>();
}

void to_json(Json& j, const RuleToggles& t) {
  j = Json{{"bound", t.bound}, {"forced", t.forced}, {"order", t.order}, {"qr", t.qr}, {"invert_qr", t.invert_qr}};
}

void from_json(const Json& j, RuleToggles& t) {
  t.bound = j.at("bound").get<bool>();
  t.forced = j.at("forced").get<bool>();
  t.order = j.at("order").get<bool>();
  t.qr = j.at("qr").get<bool>();
  t.invert_qr = j.value("invert_qr", false);
}

void to_json(Json& j, const FactRecord& f) {
  j = Json{{"kind", to_string(f.kind)},
           {"expr", f.expr},
           {"expected", f.expected},
           {"locus", f.locus},
           {"status", to_string(f.status)},
           {"actual", f.actual}};
}

void from_json(const Json& j, FactRecord& f) {
  f.kind = parse_fact_kind(j.at("kind").get<std::string>());
  f.expr = j.at("expr").get<std::string>();
  f.expected = j.at("expected").get<std::string>();
  f.locus = j.at("locus").get<std::string>();
  f.status = parse_fact_status(j.at("status").get<std::string>());
  f.actual = j.value("actual", "");
}

void to_json(Json& j, const PruneCertificate& c) {
  Json ev = Json::array();
  for (const auto& [k, v] : c.exact_values) ev.push_back(Json::array({k, v}));
  j = Json{{"rule", to_string(c.rule)},
           {"spec", c.spec},
           {"facts", c.facts},
           {"exact_values", ev},
           {"probable_primes", nat_list(c.probable_primes)},
           {"primality", kPrimalityVersion}};
}

void from_json(const Json& j, PruneCertificate& c) {
  c.rule = parse_prune_rule(j.at("rule").get<std::string>());
  c.spec = j.at("spec").get<SubtreeSpec>();
  c.facts = j.at("facts").get<std::vector<FactRecord>>();
  c.exact_values.clear();
  for (const auto& e : j.at("exact_values")) {
    c.exact_values.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  }
  c.probable_primes = nat_list_from(j.at("probable_primes"));
}

void to_json(Json& j, const SearchConfig& c) {
  j = Json{{"omega", c.omega},
           {"odd_only", c.odd_only},
           {"prime_min", natural_to_json(c.prime_min)},
           {"prime_max", natural_to_json(c.prime_max)},
           {"exponent_max", c.exponent_max},
           {"value_max", opt_nat(c.value_max)},
           {"preset", opt_to_json(c.preset)},
           {"rules", c.rules},
           {"d_enum_limit", c.d_enum_limit},
           {"seed", c.seed},
           {"leaf_budget", opt_to_json(c.leaf_budget)},
           {"time_budget_ms", opt_to_json(c.time_budget_ms)},
           {"trace", c.trace}};
}

void from_json(const Json& j, SearchConfig& c) {
  c = SearchConfig{};
  c.omega = j.at("omega").get<unsigned>();
  c.odd_only = j.at("odd_only").get<bool>();
  c.prime_min = natural_from_json(j.at("prime_min"));
  c.prime_max = natural_from_json(j.at("prime_max"));
  c.exponent_max = j.at("exponent_max").get<unsigned>();
  c.value_max = opt_nat_from(j, "value_max");
  c.preset = opt_from_json<std::string>(j, "preset");
  c.rules = j.at("rules").get<RuleToggles>();
  c.d_enum_limit = j.at("d_enum_limit").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.leaf_budget = opt_from_json<std::uint64_t>(j, "leaf_budget");
  c.time_budget_ms = opt_from_json<std::uint64_t>(j, "time_budget_ms");
  c.trace = j.at("trace").get<bool>();
}

void to_json(Json& j, const SearchReport& r) {
  j = Json{{"config", r.config},
           {"engine_version", r.engine_version},
           {"seed", r.config.seed},
           {"witnesses", r.witnesses},
           {"certificates", r.certificates},
           {"grid_leaves", r.grid_leaves},
           {"leaves_evaluated", r.leaves_evaluated},
           {"leaves_pruned", r.leaves_pruned},
           {"leaves_out_of_range", r.leaves_out_of_range},
           {"subtrees_pruned", r.subtrees_pruned},
           {"complete", r.complete},
           {"trace", r.trace}};
}

void from_json(const Json& j, SearchReport& r) {
  r.config = j.at("config").get<SearchConfig>();
  r.engine_version = j.at("engine_version").get<std::string>();
  r.witnesses = j.at("witnesses").get<std::vector<DPWitness>>();
  r.certificates = j.at("certificates").get<std::vector<PruneCertificate>>();
  r.grid_leaves = j.at("grid_leaves").get<std::uint64_t>();
  r.leaves_evaluated = j.at("leaves_evaluated").get<std::uint64_t>();
  r.leaves_pruned = j.at("leaves_pruned").get<std::uint64_t>();
  r.leaves_out_of_range = j.at("leaves_out_of_range").get<std::uint64_t>();
  r.subtrees_pruned = j.at("subtrees_pruned").get<std::uint64_t>();
  r.complete = j.at("complete").get<bool>();
  r.trace = j.at("trace").get<std::vector<std::string>>();
}

void to_json(Json& j, const SieveEntry& e) {
  j = Json{{"n", std::to_string(e.n)},
           {"d", std::to_string(e.d)},
           {"D", std::to_string(e.D)},
           {"omega", e.omega},
           {"parity", e.odd ? "odd" : "even"}};
}

void from_json(const Json& j, SieveEntry& e) {
  e.n = std::stoull(j.at("n").get<std::string>());
  e.d = std::stoull(j.at("d").get<std::string>());
  e.D = std::stoull(j.at("D").get<std::string>());
  e.omega = j.at("omega").get<unsigned>();
  e.odd = j.at("parity").get<std::string>() == "odd";
}

void to_json(Json& j, const SieveFilters& f) {
  j = Json{{"odd_only", f.odd_only}, {"omega_equals", opt_to_json(f.omega_equals)}};
}

void from_json(const Json& j, SieveFilters& f) {
  f.odd_only = j.at("odd_only").get<bool>();
  f.omega_equals = opt_from_json<unsigned>(j, "omega_equals");
}

void to_json(Json& j, const SieveResult& r) {
  j = Json{{"limit", std::to_string(r.limit)}, {"filters", r.filters}, {"entries", r.entries}};
}

void from_json(const Json& j, SieveResult& r) {
  r.limit = std::stoull(j.at("limit").get<std::string>());
  r.filters = j.at("filters").get<SieveFilters>();
  r.entries = j.at("entries").get<std::vector<SieveEntry>>();
}

void to_json(Json& j, const FixtureError& e) {
  j = Json{{"line", e.line}, {"column", e.column}, {"message", e.message}};
}

void from_json(const Json& j, FixtureError& e) {
  e.line = j.at("line").get<std::size_t>();
  e.column = j.at("column").get<std::size_t>();
  e.message = j.at("message").get<std::string>();
}

void to_json(Json& j, const FixtureSummary& s) {
  Json ledger = Json::array();
  for (const auto& r : s.records) {
    if (r.locus.find(kTypoLiteralTag) != std::string::npos || r.locus.find(kTypoIntentTag) != std::string::npos) {
      ledger.push_back(r);
    }
  }
  j = Json{{"confirmed", s.confirmed},
           {"refuted", s.refuted},
           {"parse_errors", s.parse_errors},
           {"records", s.records},
           {"typo_ledger", ledger},
           {"clean_under_typo_ledger", s.clean_under_typo_ledger()}};
}

void from_json(const Json& j, FixtureSummary& s) {
  s.confirmed = j.at("confirmed").get<std::size_t>();
  s.refuted = j.at("refuted").get<std::size_t>();
  s.parse_errors = j.at("parse_errors").get<std::vector<FixtureError>>();
  s.records = j.at("records").get<std::vector<FactRecord>>();
}

void to_json(Json& j, const RunRecord& r) {
  j = Json{{"schema_version", r.schema_version},
           {"engine_version", r.engine_version},
           {"command", r.command},
           {"config", r.config},
           {"timestamp", r.timestamp},
           {"payload_type", r.payload_type},
           {"payload", r.payload},
           {"exit_status", r.exit_status}};
}

void from_json(const Json& j, RunRecord& r) {
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kSchemaVersion) {
    throw DomainError("unsupported schema_version " + std::to_string(r.schema_version));
  }
  r.engine_version = j.at("engine_version").get<std::string>();
  r.command = j.at("command").get<std::vector<std::string>>();
  r.config = j.at("config");
  r.timestamp = j.at("timestamp").get<std::string>();
  r.payload_type = j.at("payload_type").get<std::string>();
  r.payload = j.at("payload");
  r.exit_status = j.at("exit_status").get<int>();
}

}  // namespace defiperf
