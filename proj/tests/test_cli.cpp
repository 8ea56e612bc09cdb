#include <doctest.h>

#include "experiments.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tracelab;
using namespace tracelab::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tracelab_cli_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TRACELAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(1234.5) == "1234.5");
  CHECK(format_number(2.5e-4) == "2.500000000e-04");
  CHECK(format_number(-3e15) == "-3.000000000e+15");
  CHECK_THROWS_AS(format_number(std::nan("")), NumericalError);
}

TEST_CASE("parameter resolution") {
  const ExperimentInfo& info = find_experiment("wishart");
  CHECK(resolve_params(info, Json::object()) == info.defaults);
  CHECK(resolve_params(info, Json{{"m", 7}}).at("m") == 7);
  CHECK_THROWS_AS(resolve_params(info, Json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(resolve_params(info, Json{{"m", "seven"}}), ConfigError);
  CHECK_THROWS_AS(find_experiment("nope"), ConfigError);

  RunConfig bad{"wishart", 1, 1, Json{{"m", -3}, {"trials", 0}}};
  try {
    run_experiment(bad);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("m:") != std::string::npos);
    CHECK(msg.find("trials:") != std::string::npos);
  }
}

TEST_CASE("wishart sweep has the rank transition column") {
  RunConfig c{"wishart", 3, 2, Json{{"trials", 100}, {"draws", 500}}};
  const ExperimentResult r = run_experiment(c);
  const auto s = r.table.numeric_column("s"), frac = r.table.numeric_column("full_rank_fraction");
  REQUIRE(s.size() > 10);
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(frac[i] == (s[i] <= 50 ? 1.0 : 0.0));
  CHECK(r.table.header().front() == "s");
}

TEST_CASE("artifacts are byte-identical across runs and thread counts, and replayable") {
  const auto a = scratch("a"), b = scratch("b"), c = scratch("c");
  RunConfig ca{"localization", 5, 1, Json{{"trials", 10}, {"r_max", 6}}};
  RunConfig cb{"localization", 5, 3, Json{{"trials", 10}, {"r_max", 6}}};
  write_artifacts(ca, run_experiment(ca), a);
  write_artifacts(cb, run_experiment(cb), b);
  CHECK(slurp(a / "localization.csv") == slurp(b / "localization.csv"));
  CHECK(slurp(a / "localization.svg") == slurp(b / "localization.svg"));

  const Json manifest = Json::parse(slurp(a / "manifest.json"));
  CHECK(manifest.at("experiment") == "localization");
  CHECK(manifest.at("seed") == 5);
  CHECK(manifest.at("params").at("trials") == 10);
  CHECK(manifest.at("params").at("degree") == 8);
  CHECK(manifest.contains("counters"));
  CHECK(manifest.at("versions").contains("tracelab"));

  RunConfig replay = config_from_manifest(manifest);
  write_artifacts(replay, run_experiment(replay), c);
  CHECK(slurp(a / "localization.csv") == slurp(c / "localization.csv"));
}

TEST_CASE("variance-check and demos produce finite tables") {
  for (const char* name : {"variance-check", "w2-demo", "kl-demo", "convergence", "hodlr"}) {
    Json small = Json::object();
    if (std::string(name) == "variance-check") small = {{"draws", 2000}};
    if (std::string(name) == "w2-demo") small = {{"n", 60}, {"b", 20}, {"reps", 3}};
    if (std::string(name) == "kl-demo" || std::string(name) == "convergence")
      small = {{"n", 60}, {"budgets", {30, 60}}, {"reps", 3}};
    if (std::string(name) == "hodlr") small = {{"n", 64}, {"t", 8}, {"s", 16}};
    RunConfig c{name, 2, 1, small};
    const ExperimentResult r = run_experiment(c);
    CHECK_FALSE(r.table.rows().empty());
    CHECK(r.table.str().find("nan") == std::string::npos);
    CHECK(r.svg.rfind("<svg", 0) == 0);
  }
}

TEST_CASE("command line: trace recovery example and exit codes") {
  const auto out = scratch("cli");
  REQUIRE(run_cli("trace-recovery --seed 1 --blocks 100 --out " + out.string()) == 0);
  std::ifstream is(out / "trace-recovery.csv");
  std::string header, line, last;
  std::getline(is, header);
  CHECK(header == "t,sampling_ratio,estimate,rel_error,emp_std");
  while (std::getline(is, line)) last = line;
  std::vector<std::string> fields;
  std::stringstream ss(last);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  REQUIRE(fields.size() == 5);
  CHECK(fields[0] == "100");
  CHECK(std::stod(fields[1]) <= 0.1);
  CHECK(std::stod(fields[3]) <= 1e-3);
  CHECK(std::filesystem::exists(out / "trace-recovery.svg"));
  CHECK(std::filesystem::exists(out / "manifest.json"));

  CHECK(run_cli("no-such-experiment") == 2);
  CHECK(run_cli("wishart --m -4 --out " + (out / "bad").string()) == 2);
  CHECK(run_cli("wishart --trials 2 --draws 10 --out /proc/tracelab-cannot-write") == 2);
  CHECK(run_cli("replay " + (out / "missing.json").string()) == 2);
  CHECK(run_cli("--help") == 0);
}
