// End-to-end checks of the installed CLI binary (path injected by CMake).

#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#ifndef MLPPDE_CLI_PATH
#error "MLPPDE_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(MLPPDE_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 512> buf;
  while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string value_of(const std::string& out, const std::string& key) {
  const std::string needle = key + "=";
  std::size_t pos = 0;
  while (pos < out.size()) {
    const std::size_t eol = out.find('\n', pos);
    const std::string line = out.substr(pos, eol - pos);
    if (line.rfind(needle, 0) == 0) return line.substr(needle.size());
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return "";
}

} // namespace

TEST_CASE("solve prints the degenerate constant exactly") {
  const RunResult r =
      run_cli("solve --problem heat --d 3 --T 1 --f zero --g constant:7 --n 2 --M 3 --seed 42");
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.out, "estimate") == "7");
  CHECK(value_of(r.out, "f_evals") != "");
  CHECK(value_of(r.out, "scalar_draws") != "");
}

TEST_CASE("invalid dimension is rejected with a named diagnostic") {
  const RunResult r = run_cli("solve --d 0 --n 1 --M 1");
  CHECK(r.exit_code != 0);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(r.out.find("--d") != std::string::npos);
}

TEST_CASE("verify-cost reports the hand-verified cell") {
  const RunResult r = run_cli("verify-cost --levels 2x2 --d 1");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("measured=(12,8,12)") != std::string::npos);
  CHECK(r.out.find("predicted=(12,8,12)") != std::string::npos);
  CHECK(r.out.find("PASS") != std::string::npos);
}

TEST_CASE("config file values are overridden by flags") {
  const std::string conf = "/tmp/mlppde_test_config.conf";
  {
    std::ofstream f(conf);
    f << "# comment line\n";
    f << "seeds = 20\n";
    f << "levels = 1,2\n";
  }
  const std::string csv = "/tmp/mlppde_test_study.csv";
  const RunResult r = run_cli("study --config " + conf +
                              " --d 1 --T 1 --f zero --g constant:2 --reference const:2 "
                              "--seeds 3 --output " + csv + " --seed 9");
  CHECK(r.exit_code == 0);
  // flag --seeds 3 wins over config seeds=20: 3 rows per level
  std::ifstream in(csv);
  REQUIRE(in.good());
  std::string line;
  int data_rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("problem,", 0) != 0) ++data_rows;
  CHECK(data_rows == 2 * 3);
  std::remove(conf.c_str());
  std::remove(csv.c_str());
  std::remove("/tmp/mlppde_test_study.summary.csv");
}

TEST_CASE("unknown config keys are rejected by name") {
  const std::string conf = "/tmp/mlppde_bad_config.conf";
  {
    std::ofstream f(conf);
    f << "bogus_key = 3\n";
  }
  const RunResult r = run_cli("study --config " + conf);
  CHECK(r.exit_code != 0);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(r.out.find("bogus_key") != std::string::npos);
  std::remove(conf.c_str());
}

TEST_CASE("rate fits a synthetic summary csv") {
  const std::string csv = "/tmp/mlppde_test_rate.csv";
  {
    std::ofstream f(csv);
    f << "# synthetic\n";
    f << "n,M,rmse,mean_cost_total,slope_fit_running\n";
    f << "1,1,0.31622776601683794,10,nan\n";   // 10^-0.5
    f << "2,2,0.1,100,nan\n";                  // 100^-0.5
    f << "3,3,0.03162277660168379,1000,nan\n"; // 1000^-0.5
  }
  const RunResult r = run_cli("rate --input " + csv);
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.out, "slope").substr(0, 4) == "-0.5");
  CHECK(value_of(r.out, "r2").substr(0, 1) == "1");
  std::remove(csv.c_str());
}

TEST_CASE("rate rejects too-few points") {
  const std::string csv = "/tmp/mlppde_test_rate2.csv";
  {
    std::ofstream f(csv);
    f << "n,M,rmse,mean_cost_total,slope_fit_running\n";
    f << "1,1,0.3,10,nan\n";
    f << "2,2,0.1,100,nan\n";
  }
  const RunResult r = run_cli("rate --input " + csv);
  CHECK(r.exit_code != 0);
  CHECK(r.out.find("error:") != std::string::npos);
  std::remove(csv.c_str());
}

TEST_CASE("environment variable seeds the run when no flag is given") {
  const RunResult a = run_cli("solve --d 1 --f allen-cahn --g norm_sq --n 2 --M 2 --seed 5");
  setenv("MLPPDE_SEED", "5", 1);
  const RunResult b = run_cli("solve --d 1 --f allen-cahn --g norm_sq --n 2 --M 2");
  unsetenv("MLPPDE_SEED");
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  CHECK(value_of(a.out, "estimate") == value_of(b.out, "estimate"));
}

TEST_CASE("oracle subcommand evaluates the ode picard reference") {
  const RunResult r = run_cli("oracle --name ode-picard --f linear:1 --g0 1 --t 1 --picard-n 3");
  CHECK(r.exit_code == 0);
  CHECK(value_of(r.out, "value") == "2.5");
}

TEST_CASE("gbm runs are flagged as an extension in the metadata") {
  const RunResult r = run_cli(
      "solve --problem gbm --mu 0 --sigma 0.2 --d 2 --f zero --g constant:1 --n 1 --M 2 "
      "--x const:1 --seed 3");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("extends the heat-kernel setting") != std::string::npos);
  CHECK(value_of(r.out, "estimate") == "1");
}
