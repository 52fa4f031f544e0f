#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// End-to-end tests driving the installed binary through std::system.

namespace {

const std::string kCli = CCTSENS_CLI_PATH;
const std::string kScenarios = CCTSENS_SCENARIO_DIR;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run(const std::string& args) {
  const std::string out_file = "/tmp/cctsens_test_out.txt";
  const std::string cmd = kCli + " " + args + " > " + out_file + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(rc);
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream ss(s);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("cct command reports the SMIB base case") {
  const auto r = run("cct --scenario " + kScenarios + "/smib.scn");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("\"category\": 1") != std::string::npos);
  REQUIRE(r.out.find("\"t_cr\": 0.895879734") != std::string::npos);
  REQUIRE(r.out.find("\"cuep\": null") != std::string::npos);
}

TEST_CASE("cct honors --set overrides") {
  const auto r = run("cct --scenario " + kScenarios + "/smib.scn --set M=0.1");
  REQUIRE(r.exit_code == 0);
  // analytic: t_cr = 2 M ln 6 = 0.3583518938
  REQUIRE(r.out.find("\"t_cr\": 0.35835189") != std::string::npos);
}

TEST_CASE("sens command emits one record per parameter") {
  const auto r = run("sens --scenario " + kScenarios + "/smib.scn");
  REQUIRE(r.exit_code == 0);
  for (const char* name : {"\"Pm\"", "\"M\"", "\"delta_max\"", "\"omega_max\""})
    REQUIRE(r.out.find(name) != std::string::npos);
  REQUIRE(r.out.find("\"dtcr_dp\": -4.1666666") != std::string::npos);
  REQUIRE(r.out.find("\"dtcr_dp\": 2.49999999") != std::string::npos);
}

TEST_CASE("sens --verify adds the oracle column") {
  const auto r = run("sens --scenario " + kScenarios + "/smib.scn --verify");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.out.find("\"oracle_fd\"") != std::string::npos);
  REQUIRE(r.out.find("\"rel_err\"") != std::string::npos);
}

TEST_CASE("sweep command writes a CSV with headers and status") {
  const auto r =
      run("sweep --scenario " + kScenarios + "/smib.scn --param M --values 0.2,0.25");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[0] == "param_value,t_cr,category,dtcr_dp_formula,status");
  REQUIRE(lines[1].substr(0, 4) == "0.2,");
  REQUIRE(lines[1].find(",ok") != std::string::npos);
  REQUIRE(lines[2].substr(0, 5) == "0.25,");
}

TEST_CASE("sweep records per-point failures without aborting") {
  // delta_max = 0.5 sits below the SEP angle; that point fails, the rest run
  const auto r = run("sweep --scenario " + kScenarios +
                     "/smib.scn --param delta_max --values 0.5,2.4434");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 3);
  REQUIRE(lines[1].find("BracketFailure") != std::string::npos);
  REQUIRE(lines[2].find(",ok") != std::string::npos);
}

TEST_CASE("sweep with an empty values list emits only the header") {
  const auto r = run("sweep --scenario " + kScenarios + "/smib.scn --param M");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 1);
}

TEST_CASE("trace command emits the sensitivity columns") {
  const auto r = run("trace --scenario " + kScenarios +
                     "/smib.scn --phase fault --duration 0.002");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);  // header + t = 0, 0.001, 0.002
  REQUIRE(lines[0] ==
          "t,x_1,x_2,H,phi_x_11,phi_x_12,phi_x_21,phi_x_22,"
          "phi_p_11,phi_p_12,phi_p_13,phi_p_14,phi_p_21,phi_p_22,phi_p_23,phi_p_24");
  REQUIRE(lines[1].substr(0, 2) == "0,");
}

TEST_CASE("trace accepts an explicit initial state") {
  const auto r = run("trace --scenario " + kScenarios +
                     "/smib.scn --phase post --x0 1.0,0.0 --duration 0.001");
  REQUIRE(r.exit_code == 0);
  REQUIRE(lines_of(r.out).at(1).substr(0, 4) == "0,1,");
}

TEST_CASE("csr command writes the grid CSV and a JSON sidecar") {
  const std::string out = "/tmp/cctsens_test_csr.csv";
  const auto r = run("csr --scenario " + kScenarios +
                     "/smib.scn --nx 11 --ny 11 --window 0:1.5:-1:1 --tmax 5 --out " + out);
  REQUIRE(r.exit_code == 0);
  std::ifstream csv(out);
  REQUIRE(csv.good());
  std::string header;
  std::getline(csv, header);
  REQUIRE(header == "x,y,label");
  std::ifstream meta("/tmp/cctsens_test_csr.json");
  REQUIRE(meta.good());
  std::ostringstream ss;
  ss << meta.rdbuf();
  REQUIRE(ss.str().find("\"sep\"") != std::string::npos);
  REQUIRE(ss.str().find("\"semi_saddles\"") != std::string::npos);
}

TEST_CASE("failure exit codes") {
  SECTION("missing scenario file exits 2") {
    REQUIRE(run("cct --scenario /nonexistent.scn").exit_code == 2);
  }
  SECTION("malformed command line exits 2") {
    REQUIRE(run("cct").exit_code == 2);
    REQUIRE(run("unknowncmd").exit_code == 2);
  }
  SECTION("unknown parameter name exits 1 with the error name") {
    const auto r = run("cct --scenario " + kScenarios + "/smib.scn --set bogus=1");
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.out.find("InvalidParameter") != std::string::npos);
  }
  SECTION("search failure exits 1 with the error name") {
    const auto r = run("cct --scenario " + kScenarios + "/smib.scn --set delta_max=0.5");
    REQUIRE(r.exit_code == 1);
    REQUIRE(r.out.find("BracketFailure") != std::string::npos);
  }
  SECTION("malformed sweep range exits 2") {
    const auto r = run("sweep --scenario " + kScenarios +
                       "/smib.scn --param M --range 0.1:0.3");
    REQUIRE(r.exit_code == 2);
  }
}

TEST_CASE("cct output is numerically reproducible across runs") {
  const auto a = run("cct --scenario " + kScenarios + "/smib.scn");
  const auto b = run("cct --scenario " + kScenarios + "/smib.scn");
  REQUIRE(a.out == b.out);
}
