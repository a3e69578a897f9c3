// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <iostream>
#include <set>
#include <sstream>

#include "defiperf/cli.hpp"
#include "defiperf/errors.hpp"
#include "defiperf/serialize.hpp"

using namespace defiperf;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << " (" << seconds << " s)";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

template <class F>
void run(int id, const std::string& name, double budget_s, F&& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  if (o.pass && s > budget_s) o = {false, "over the " + std::to_string(budget_s) + " s budget; " + o.detail};
  report(id, name, o, s);
}

std::string cli_out(const std::vector<std::string>& args, int expect_code) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != expect_code) {
    throw std::runtime_error("defiperf " + args.front() + " exited " + std::to_string(code) + ": " + err.str());
  }
  return out.str();
}

const std::vector<std::string> kOracleArgs{"oracle", "--limit", "10000000", "--odd", "--omega", "4", "--seed", "1"};
const std::vector<std::string> kSearchArgs{"search", "--omega", "4", "--odd", "--prime-max", "50",
                                           "--exp-max", "6", "--seed", "1"};

std::set<std::string> witnesses_of(const SearchReport& r) {
  std::set<std::string> s;
  for (const auto& w : r.witnesses) s.insert(w.n.value().get_str());
  return s;
}

}  // namespace

int main() {
  std::string oracle_json, search_json;
  SieveResult odd_sieve;
  SearchReport search_report;

  run(1, "oracle to 1e7, odd, omega 4 gives exactly 9018009", 120, [&]() -> Outcome {
    oracle_json = cli_out(kOracleArgs, kExitOk);
    const RunRecord rec = Json::parse(oracle_json).get<RunRecord>();
    odd_sieve = rec.payload.get<SieveResult>();
    const auto& e = odd_sieve.entries;
    std::ostringstream d;
    d << e.size() << " entries";
    for (const auto& x : e) d << "; n=" << x.n << " d=" << x.d << " D=" << x.D;
    const bool ok = e.size() == 1 && e[0].n == 9018009 && e[0].d == 819 && e[0].D == 11011 && e[0].omega == 4 &&
                    Factorization::parse("3^2*7^2*11^2*13^2").value() == 9018009;
    return {ok, d.str()};
  });

  run(2, "search equals oracle on its domain, with and without pruning", 300, [&]() -> Outcome {
    search_json = cli_out(kSearchArgs, kExitOk);
    const RunRecord rec = Json::parse(search_json).get<RunRecord>();
    search_report = rec.payload.get<SearchReport>();
    auto off_args = kSearchArgs;
    off_args.insert(off_args.end(), {"--rules", "none"});
    const SearchReport off = Json::parse(cli_out(off_args, kExitOk)).get<RunRecord>().payload.get<SearchReport>();
    const auto cc = cross_check(search_report, odd_sieve);
    const auto on_set = witnesses_of(search_report);
    const auto off_set = witnesses_of(off);
    std::ostringstream d;
    d << "pruned run: " << on_set.size() << " witness(es), " << search_report.subtrees_pruned << " subtrees pruned, "
      << search_report.leaves_evaluated << "/" << search_report.grid_leaves << " leaves evaluated; unpruned run: "
      << off_set.size() << " witness(es); " << cc.diagnostic;
    const bool ok = search_report.complete && off.complete && cc.agree && !cc.vacuous &&
                    on_set == std::set<std::string>{"9018009"} && off_set == on_set && replay(search_report);
    return {ok, d.str()};
  });

  SieveResult all_sieve;
  run(3, "sigma(n) = (2D-1)d for every oracle witness up to 1e7", 300, [&]() -> Outcome {
    all_sieve = enumerate_dp(10'000'000);
    std::size_t checked = 0;
    for (const auto& e : all_sieve.entries) {
      const auto w = dp_witness(factorize(Natural(std::to_string(e.n))).factors);
      if (!w) return {false, "no witness for " + std::to_string(e.n)};
      if (w->d.value() != Natural(std::to_string(e.d)) || w->D.value() != Natural(std::to_string(e.D))) {
        return {false, "d or D mismatch at " + std::to_string(e.n)};
      }
      const Natural D(std::to_string(e.D)), dd(std::to_string(e.d));
      if (!verify_eq1(*w) || w->sigma_n != (2 * D - 1) * dd) {
        return {false, "identity fails at " + std::to_string(e.n)};
      }
      ++checked;
    }
    return {checked == all_sieve.entries.size() && checked > 0, std::to_string(checked) + " witnesses"};
  });

  run(4, "every odd witness up to 1e7 is a perfect square", 60, [&]() -> Outcome {
    std::size_t odd = 0;
    for (const auto& e : all_sieve.entries) {
      if (e.n % 2 == 0) continue;
      ++odd;
      const Natural n(std::to_string(e.n));
      if (!mpz_perfect_square_p(n.get_mpz_t())) return {false, std::to_string(e.n) + " is not a square"};
      const auto w = dp_witness(factorize(n).factors);
      for (const auto& pp : w->n.factors())
        if (pp.a % 2) return {false, std::to_string(e.n) + " has an odd exponent"};
    }
    return {!all_sieve.entries.empty(), std::to_string(odd) + " odd witness(es)"};
  });

  run(5, "fact corpus clean under the typo ledger", 10, [&]() -> Outcome {
    const auto s = verify_fixture_file(std::string(DEFIPERF_DATA_DIR) + "/facts.tsv");
    auto has = [&](const std::string& kind, const std::string& expr, const std::string& expected) {
      for (const auto& r : s.records) {
        if (to_string(r.kind) == kind && r.expr == expr && r.expected == expected &&
            r.status == FactStatus::Confirmed)
          return true;
      }
      return false;
    };
    std::size_t literal = 0;
    for (const auto& r : s.records) literal += r.locus.find(kTypoLiteralTag) != std::string::npos;
    std::ostringstream d;
    d << s.records.size() << " records, " << s.confirmed << " confirmed, " << s.refuted << " refuted, " << literal
      << " literal typo forms, " << s.parse_errors.size() << " parse errors";
    const bool required = has("ORDER", "(ord 11 25)", "5") && has("DIVIDES", "(sigma 3 2)", "13") &&
                          has("LEGENDRE", "(legendre 2 11)", "-1") &&
                          has("INEQUALITY", "(prod (sr 3 2) (sr 5 2) (sr 11 2) (sr 61 2))", ">2") &&
                          has("INEQUALITY", "(sum (prod (sr 3 2) (sup 5) (sup 11) (sup 167)) (inv 605))", "<2");
    if (!required) d << "; a required fact is missing";
    return {s.records.size() >= 40 && s.clean_under_typo_ledger() && required, d.str()};
  });

  run(6, "certificates of the criterion 2 run audit clean", 600, [&]() -> Outcome {
    std::size_t audited = 0, skipped = 0;
    for (std::size_t i = 0; i < search_report.certificates.size(); ++i) {
      const auto a = audit_certificate(search_report.certificates[i], 1'000'000);
      if (!a.audited) {
        ++skipped;
        continue;
      }
      ++audited;
      if (a.counterexample) {
        return {false, "certificate #" + std::to_string(i) + " excludes " + a.counterexample->n.to_string()};
      }
    }
    return {audited > 0, std::to_string(audited) + " audited, " + std::to_string(skipped) + " above 1e6 completions"};
  });

  run(7, "seeded runs of criteria 1 and 2 are byte-identical", 300, [&]() -> Outcome {
    const bool o = cli_out(kOracleArgs, kExitOk) == oracle_json;
    const bool s = cli_out(kSearchArgs, kExitOk) == search_json;
    return {o && s && !oracle_json.empty() && !search_json.empty(),
            std::string("oracle ") + (o ? "identical" : "differs") + ", search " + (s ? "identical" : "differs")};
  });

  return failures == 0 ? 0 : 1;
}
