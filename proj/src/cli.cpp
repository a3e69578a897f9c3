#include "defiperf/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "defiperf/errors.hpp"
#include "defiperf/serialize.hpp"

namespace defiperf {

namespace {

std::string iso_utc(std::time_t t) {
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// SOURCE_DATE_EPOCH wins; a fixed seed pins the epoch so seeded runs are
// byte-identical; otherwise the wall clock.
std::string run_timestamp(bool seeded) {
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    const long long v = std::strtoll(sde, &end, 10);
    if (end != sde && *end == '\0' && v >= 0) return iso_utc(static_cast<std::time_t>(v));
  }
  if (seeded) return iso_utc(0);
  return iso_utc(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now()));
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  const Natural v = parse_natural(s);
  if (mpz_sizeinbase(v.get_mpz_t(), 2) > 64) throw DomainError(std::string(what) + " out of range");
  std::uint64_t out = 0;
  mpz_export(&out, nullptr, -1, sizeof out, 0, 0, v.get_mpz_t());
  return out;
}

unsigned parse_uint(const std::string& s, const char* what) {
  const auto v = parse_u64(s, what);
  if (v > 0xffffffffULL) throw DomainError(std::string(what) + " out of range");
  return static_cast<unsigned>(v);
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw DomainError("expected a boolean, got '" + s + "'");
}

RuleToggles parse_rules(const std::string& list) {
  RuleToggles t{false, false, false, false, false};
  if (list == "all") return RuleToggles{};
  if (list == "none") return t;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "bound") t.bound = true;
    else if (item == "forced") t.forced = true;
    else if (item == "order") t.order = true;
    else if (item == "qr") t.qr = true;
    else if (item == "invert-qr") t.invert_qr = true;
    else throw DomainError("unknown rule '" + item + "'");
  }
  return t;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void apply_setting(SearchConfig& c, const std::string& key, const std::string& value) {
  if (key == "omega") c.omega = parse_uint(value, "omega");
  else if (key == "odd") c.odd_only = parse_bool(value);
  else if (key == "prime_min") c.prime_min = parse_natural(value);
  else if (key == "prime_max") c.prime_max = parse_natural(value);
  else if (key == "exp_max" || key == "exponent_max") c.exponent_max = parse_uint(value, "exp_max");
  else if (key == "value_max") c.value_max = parse_natural(value);
  else if (key == "preset") c.preset = value;
  else if (key == "rules") c.rules = parse_rules(value);
  else if (key == "seed") c.seed = parse_u64(value, "seed");
  else if (key == "leaf_budget") c.leaf_budget = parse_u64(value, "leaf_budget");
  else if (key == "time_budget_ms") c.time_budget_ms = parse_u64(value, "time_budget_ms");
  else if (key == "trace") c.trace = parse_bool(value);
  else if (key == "d_enum_limit") c.d_enum_limit = parse_u64(value, "d_enum_limit");
  else if (key == "threads") c.threads = parse_uint(value, "threads");
  else throw DomainError("unknown config key '" + key + "'");
}

// key = value lines, '#' starts a comment.
void load_config_file(SearchConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read config file " + path);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", no, 1);
    try {
      apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const DomainError& e) {
      throw ParseError(e.what(), no, eq + 2);
    }
  }
}

struct Common {
  std::string seed;
  std::string out_path;
};

int emit(RunRecord rec, const Common& common, bool seeded, std::ostream& out, std::ostream& err) {
  rec.timestamp = run_timestamp(seeded);
  const std::string text = Json(rec).dump(2) + "\n";
  if (!common.out_path.empty()) {
    std::ofstream f(common.out_path, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << common.out_path << "\n";
      return kExitInputError;
    }
    f << text;
  } else {
    out << text;
  }
  return rec.exit_status;
}

Factorization parse_verify_input(const std::string& s) {
  if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
    const Natural n = parse_natural(s);
    if (n < 2) throw DomainError("n must be >= 2");
    const FactorResult fr = factorize(n);
    if (!fr.fully_factored) throw DomainError("could not fully factor " + s + "; pass a factorization literal");
    return fr.factors;
  }
  Factorization f = Factorization::parse(s);
  if (f.value() < 2) throw DomainError("n must be >= 2");
  return f;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Search, verify and certify deficient-perfect numbers", "defiperf"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", common.seed, "Fixed seed; also pins the timestamp");
    sub->add_option("--out", common.out_path, "Write the run record to a file");
  };

  auto* verify = app.add_subcommand("verify", "Check one number");
  std::string verify_input;
  verify->add_option("n", verify_input, "Decimal n or p^a*q^b literal")->required();
  add_common(verify);

  auto* search = app.add_subcommand("search", "Branch-and-bound search over factorization shapes");
  std::string s_omega, s_pmin, s_pmax, s_exp, s_vmax, s_preset, s_rules, s_leaf, s_time, s_config, s_threads, s_dlim;
  bool s_odd = false, s_trace = false;
  search->add_option("--omega", s_omega, "Number of distinct primes");
  search->add_flag("--odd", s_odd, "Odd n only (even exponent grid)");
  search->add_option("--prime-min", s_pmin, "Smallest prime considered");
  search->add_option("--prime-max", s_pmax, "Largest prime considered");
  search->add_option("--exp-max", s_exp, "Largest exponent");
  search->add_option("--value-max", s_vmax, "Cap on n");
  search->add_option("--preset", s_preset, "paper-s5");
  search->add_option("--rules", s_rules, "all, none, or a list of bound,forced,order,qr");
  search->add_option("--leaf-budget", s_leaf, "Stop after this many leaf evaluations");
  search->add_option("--time-budget-ms", s_time, "Stop after this much wall time");
  search->add_option("--config", s_config, "key = value config file; flags override it");
  search->add_option("--threads", s_threads, "Worker threads (0 = all cores)");
  search->add_option("--d-enum-limit", s_dlim, "Largest explicit D-set");
  search->add_flag("--trace", s_trace, "Record a node trace in the report");
  add_common(search);

  auto* oracle = app.add_subcommand("oracle", "Divisor-sum sieve up to a limit");
  std::string o_limit, o_omega, o_csv;
  bool o_odd = false;
  oracle->add_option("--limit", o_limit, "Largest n")->required();
  oracle->add_flag("--odd", o_odd, "Odd n only");
  oracle->add_option("--omega", o_omega, "Keep n with exactly this many distinct primes");
  oracle->add_option("--csv", o_csv, "Also write n,d,D,omega,parity rows to this file");
  add_common(oracle);

  auto* facts = app.add_subcommand("facts", "Verify a fact fixture file");
  std::string f_path;
  facts->add_option("path", f_path, "Fixture file")->required();
  add_common(facts);

  std::vector<const char*> argv{"defiperf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  RunRecord rec;
  rec.command = args;
  const bool seeded = !common.seed.empty();

  try {
    std::uint64_t seed = FactorBudget{}.seed;
    if (seeded) seed = parse_u64(common.seed, "seed");

    if (*verify) {
      rec.config = Json{{"input", verify_input}};
      const Factorization f = parse_verify_input(verify_input);
      if (auto w = dp_witness(f)) {
        verify_eq1(*w);
        rec.payload_type = "witness";
        rec.payload = *w;
        rec.exit_status = kExitOk;
      } else {
        const Natural n = f.value();
        const Natural s = sigma(f);
        rec.payload_type = "non_witness";
        rec.payload = Json{{"n", natural_to_json(n)},
                           {"n_factors", f},
                           {"sigma", natural_to_json(s)},
                           {"delta", natural_to_json(Integer(2 * n - s))},
                           {"message", "not deficient-perfect"}};
        rec.exit_status = kExitNotWitness;
      }
      return emit(std::move(rec), common, seeded, out, err);
    }

    if (*search) {
      SearchConfig c;
      if (!s_config.empty()) load_config_file(c, s_config);
      if (seeded) c.seed = seed;
      if (!s_omega.empty()) c.omega = parse_uint(s_omega, "omega");
      if (s_odd) c.odd_only = true;
      if (!s_pmin.empty()) c.prime_min = parse_natural(s_pmin);
      if (!s_pmax.empty()) c.prime_max = parse_natural(s_pmax);
      if (!s_exp.empty()) c.exponent_max = parse_uint(s_exp, "exp-max");
      if (!s_vmax.empty()) c.value_max = parse_natural(s_vmax);
      if (!s_preset.empty()) c.preset = s_preset;
      if (!s_rules.empty()) c.rules = parse_rules(s_rules);
      if (!s_leaf.empty()) c.leaf_budget = parse_u64(s_leaf, "leaf-budget");
      if (!s_time.empty()) c.time_budget_ms = parse_u64(s_time, "time-budget-ms");
      if (!s_threads.empty()) c.threads = parse_uint(s_threads, "threads");
      if (!s_dlim.empty()) c.d_enum_limit = parse_u64(s_dlim, "d-enum-limit");
      if (s_trace) c.trace = true;
      validate(c);
      rec.config = c;
      const SearchReport report = enumerate(c);
      rec.payload_type = "search_report";
      rec.payload = report;
      rec.exit_status = report.complete ? kExitOk : kExitTruncated;
      if (!report.complete) err << "warning: search truncated by budget\n";
      return emit(std::move(rec), common, seeded, out, err);
    }

    if (*oracle) {
      const std::uint64_t limit = parse_u64(o_limit, "limit");
      if (limit < 2) throw DomainError("limit must be >= 2");
      SieveFilters filters;
      filters.odd_only = o_odd;
      if (!o_omega.empty()) filters.omega_equals = parse_uint(o_omega, "omega");
      rec.config = Json{{"limit", std::to_string(limit)}, {"filters", filters}};
      const SieveResult res = enumerate_dp(limit, filters);
      if (!o_csv.empty()) {
        std::ofstream f(o_csv, std::ios::binary);
        if (!f) throw DomainError("cannot write " + o_csv);
        f << to_csv(res);
      }
      rec.payload_type = "sieve_result";
      rec.payload = res;
      rec.exit_status = kExitOk;
      return emit(std::move(rec), common, seeded, out, err);
    }

    if (*facts) {
      rec.config = Json{{"path", f_path}};
      const FixtureSummary s = verify_fixture_file(f_path);
      rec.payload_type = "fact_summary";
      rec.payload = s;
      for (const auto& e : s.parse_errors) err << f_path << ":" << e.line << ":" << e.column << ": " << e.message << "\n";
      rec.exit_status = !s.parse_errors.empty() ? kExitInputError : (s.refuted > 0 ? kExitRefuted : kExitOk);
      return emit(std::move(rec), common, seeded, out, err);
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace defiperf
