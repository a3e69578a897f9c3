#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "defiperf/cli.hpp"
#include "defiperf/errors.hpp"
#include "defiperf/serialize.hpp"

using namespace defiperf;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("defiperf_test_" + name);
  std::ofstream(p) << body;
  return p;
}

template <class T>
void round_trip(const T& value) {
  const Json j = value;
  const T back = j.get<T>();
  CHECK(back == value);
  CHECK(Json(back).dump() == j.dump());
}

}  // namespace

TEST_CASE("verify exit codes") {
  const auto ok = cli({"verify", "3^2*7^2*11^2*13^2"});
  CHECK(ok.code == kExitOk);
  const auto j = Json::parse(ok.out);
  CHECK(j["payload_type"] == "witness");
  CHECK(j["payload"]["d"] == "819");
  CHECK(j["payload"]["D"] == "11011");
  CHECK(j["exit_status"] == 0);
  CHECK(cli({"verify", "9018009"}).code == kExitOk);
  const auto no = cli({"verify", "9"});
  CHECK(no.code == kExitNotWitness);
  CHECK(Json::parse(no.out)["payload_type"] == "non_witness");
  const auto bad = cli({"verify", "x"});
  CHECK(bad.code == kExitInputError);
  CHECK(bad.out.empty());
  CHECK_FALSE(bad.err.empty());
  CHECK(cli({"verify", "13^2*3^2"}).code == kExitInputError);
  CHECK(cli({"verify", "1"}).code == kExitInputError);
  CHECK(cli({}).code == kExitInputError);
  CHECK(cli({"frobnicate"}).code == kExitInputError);
}

TEST_CASE("search and oracle exit codes") {
  CHECK(cli({"search", "--omega", "0"}).code == kExitInputError);
  CHECK(cli({"search", "--rules", "bogus"}).code == kExitInputError);
  CHECK(cli({"oracle", "--limit", "1"}).code == kExitInputError);
  CHECK(cli({"oracle", "--limit", "ten"}).code == kExitInputError);
  const auto s = cli({"search", "--omega", "1", "--prime-max", "3", "--exp-max", "5"});
  CHECK(s.code == kExitOk);
  CHECK(Json::parse(s.out)["payload"]["witnesses"].size() == 5);
  const auto t = cli({"search", "--omega", "4", "--odd", "--prime-max", "50", "--exp-max", "6", "--leaf-budget", "3"});
  CHECK(t.code == kExitTruncated);
  CHECK(Json::parse(t.out)["payload"]["complete"] == false);
  const auto o = cli({"oracle", "--limit", "100"});
  CHECK(o.code == kExitOk);
  CHECK(Json::parse(o.out)["payload"]["entries"].size() == 8);
}

TEST_CASE("facts exit codes") {
  const auto empty = temp_file("empty.tsv", "");
  const auto e = cli({"facts", empty.string()});
  CHECK(e.code == kExitOk);
  const auto ej = Json::parse(e.out)["payload"];
  CHECK(ej["confirmed"] == 0);
  CHECK(ej["refuted"] == 0);
  CHECK(ej["records"].empty());
  const auto garbage = temp_file("garbage.tsv", "not a fact\n");
  CHECK(cli({"facts", garbage.string()}).code == kExitInputError);
  const auto refuted = temp_file("refuted.tsv", "ORDER\t(ord 11 25)\t4\tx\n");
  CHECK(cli({"facts", refuted.string()}).code == kExitRefuted);
  CHECK(cli({"facts", "/nonexistent/file.tsv"}).code == kExitInputError);
  const auto corpus = cli({"facts", std::string(DEFIPERF_DATA_DIR) + "/facts.tsv"});
  CHECK((corpus.code == kExitOk || corpus.code == kExitRefuted));
  CHECK(Json::parse(corpus.out)["payload"]["clean_under_typo_ledger"] == true);
}

TEST_CASE("config file and --out") {
  const auto cfg = temp_file("search.cfg", "# small run\nomega = 1\nprime_max = 3\nexp_max = 3\n");
  const auto r = cli({"search", "--config", cfg.string(), "--exp-max", "5", "--seed", "1"});
  CHECK(r.code == kExitOk);
  const auto j = Json::parse(r.out);
  CHECK(j["config"]["exponent_max"] == 5);
  CHECK(j["payload"]["witnesses"].size() == 5);
  const auto bad = temp_file("bad.cfg", "omega = four\n");
  CHECK(cli({"search", "--config", bad.string()}).code == kExitInputError);
  const auto unknown = temp_file("unknown.cfg", "colour = blue\n");
  CHECK(cli({"search", "--config", unknown.string()}).code == kExitInputError);

  const auto out = std::filesystem::temp_directory_path() / "defiperf_test_out.json";
  std::filesystem::remove(out);
  const auto w = cli({"verify", "9018009", "--out", out.string(), "--seed", "3"});
  CHECK(w.code == kExitOk);
  CHECK(w.out.empty());
  std::ifstream in(out);
  std::stringstream body;
  body << in.rdbuf();
  CHECK(Json::parse(body.str())["payload"]["n"] == "9018009");
}

TEST_CASE("seeded runs are byte-identical") {
  const std::vector<std::string> search{"search", "--omega", "4", "--odd", "--prime-max", "30", "--exp-max", "4",
                                        "--seed", "42"};
  const auto a = cli(search);
  const auto b = cli(search);
  CHECK(a.out == b.out);
  CHECK(Json::parse(a.out)["timestamp"] == "1970-01-01T00:00:00Z");
  auto threaded = search;
  threaded.insert(threaded.end(), {"--threads", "3"});
  // The command echo differs, the rest must not.
  auto ja = Json::parse(a.out), jt = Json::parse(cli(threaded).out);
  ja.erase("command");
  jt.erase("command");
  CHECK(ja.dump() == jt.dump());
  const std::vector<std::string> oracle{"oracle", "--limit", "100000", "--seed", "42"};
  CHECK(cli(oracle).out == cli(oracle).out);
}

TEST_CASE("run record layout") {
  const auto j = Json::parse(cli({"verify", "10", "--seed", "0"}).out);
  for (const char* key : {"schema_version", "engine_version", "command", "config", "timestamp", "payload_type",
                          "payload", "exit_status"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["schema_version"] == kSchemaVersion);
  CHECK(j["engine_version"] == std::string(kEngineVersion));
  RunRecord rec = j.get<RunRecord>();
  CHECK(Json(rec) == j);
  auto wrong = j;
  wrong["schema_version"] = 99;
  CHECK_THROWS_AS(wrong.get<RunRecord>(), DomainError);
}

TEST_CASE("round trips for every payload type") {
  SearchConfig c;
  c.omega = 4;
  c.odd_only = true;
  c.prime_max = 30;
  c.exponent_max = 4;
  c.value_max = Natural("100000000000000000000");
  c.trace = true;
  c.threads = 0;
  const auto report = enumerate(c);
  REQUIRE(!report.certificates.empty());
  round_trip(report);
  round_trip(report.config);
  round_trip(report.certificates.front());
  round_trip(report.certificates.back());
  round_trip(*dp_witness(Factorization::parse("3^2*7^2*11^2*13^2")));
  round_trip(enumerate_dp(1000, {false, 2}, 1));
  round_trip(verify_fixture_file(std::string(DEFIPERF_DATA_DIR) + "/facts.tsv"));
  round_trip(verify_fixture_text("bad line\nORDER\t(ord 3 7)\t6\tx\n"));
  round_trip(Factorization{});
  SubtreeSpec s;
  s.primes = {3, 5};
  s.exponents = {ExponentRange::fixed(2), {2, std::nullopt, true}};
  s.beta = {BetaStatus::Zero, BetaStatus::Positive};
  s.open = OpenSlots{2, Natural(7), Natural(100), {2, 6, true}};
  s.d_constraints.upper_bound = Natural(1000);
  s.d_constraints.modulus = 26;
  s.d_constraints.residue = 7;
  s.d_constraints.forced = {13};
  s.abundancy_only = true;
  round_trip(s);
  CHECK_THROWS(natural_from_json(Json("12x")));
  CHECK_THROWS(natural_from_json(Json(12.5)));
}
