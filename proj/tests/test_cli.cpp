// Black-box tests of the command-line binary: each case spawns the real
// executable and checks exit codes, stdout, and file artifacts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(CLI_PATH) + " " + args + " 2>&1";
  std::FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  size_t got = 0;
  while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int raw = pclose(pipe);
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return result;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool exists(const std::string& path) {
  std::ifstream in(path);
  return in.good();
}

const std::string kFixture = std::string(FIXTURE_DIR) + "/four_row.csv";
const std::string kFastLearners =
    R"('[{"name":"mean"},{"name":"ols"}]')";

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("transmogrify").exit_code == 2);
  CHECK(run_cli("estimate").exit_code == 2);  // missing required flags
  CHECK(run_cli("estimate --data x.csv --estimator bogus").exit_code == 2);
  const auto help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("estimate") != std::string::npos);
  CHECK(run_cli("estimate --help").exit_code == 0);
}

TEST_CASE("estimate prints the hand-oracle JSON and is rerun-identical") {
  const std::string args =
      "estimate --data " + kFixture + " --estimator unadjusted";
  const auto first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("\"psi_hat\": 1.0") != std::string::npos);
  CHECK(first.output.find("\"se\": 1.0") != std::string::npos);
  CHECK(first.output.find("\"estimator\": \"unadjusted\"") !=
        std::string::npos);
  const auto second = run_cli(args);
  CHECK(second.exit_code == 0);
  CHECK(second.output == first.output);
}

TEST_CASE("data errors exit 1 with a message on the error stream") {
  const auto missing =
      run_cli("estimate --data nowhere.csv --estimator unadjusted");
  CHECK(missing.exit_code == 1);
  CHECK(missing.output.find("error:") != std::string::npos);
  CHECK(missing.output.find("nowhere.csv") != std::string::npos);

  const auto no_hist =
      run_cli("estimate --data " + kFixture + " --estimator prog-historical");
  CHECK(no_hist.exit_code == 2);  // missing companion flag is a usage error
  CHECK(no_hist.output.find("--historical") != std::string::npos);

  const auto bad_learners =
      run_cli("estimate --data " + kFixture +
              " --estimator unadjusted --learners '{oops'");
  CHECK(bad_learners.exit_code == 1);
}

TEST_CASE("dump-dgp artifacts feed every estimator") {
  std::remove("cli_trial.csv");
  std::remove("cli_hist.csv");
  const auto dump = run_cli(
      "dump-dgp --out cli_trial.csv --hist-out cli_hist.csv --effect "
      "heterogeneous --n 120 --n-hist 300 --seed 9");
  REQUIRE(dump.exit_code == 0);
  REQUIRE(exists("cli_trial.csv"));
  REQUIRE(exists("cli_hist.csv"));
  CHECK(slurp("cli_trial.csv").rfind("y,a,w1", 0) == 0);

  // Identical seeds dump identical bytes.
  const auto again = run_cli(
      "dump-dgp --out cli_trial2.csv --effect heterogeneous --n 120 "
      "--n-hist 300 --seed 9");
  REQUIRE(again.exit_code == 0);
  CHECK(slurp("cli_trial2.csv") == slurp("cli_trial.csv"));
  std::remove("cli_trial2.csv");

  const std::string fast =
      " --folds 5 --sl-folds 3 --learners " + kFastLearners + " --seed 7";
  for (const std::string estimator :
       {"unadjusted", "ancova", "within-trial", "tmle", "tmle-linear",
        "oracle"}) {
    const auto result = run_cli("estimate --data cli_trial.csv --estimator " +
                                estimator + fast);
    CAPTURE(estimator);
    CAPTURE(result.output);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"psi_hat\"") != std::string::npos);
  }
  const auto adjusted = run_cli(
      "estimate --data cli_trial.csv --historical cli_hist.csv "
      "--estimator prog-historical --sl-folds 3 --learners " +
      kFastLearners);
  CHECK(adjusted.exit_code == 0);
  CHECK(adjusted.output.find("selected_learner") != std::string::npos);

  // The oracle needs truth columns; a plain trial file is rejected.
  const auto plain_oracle =
      run_cli("estimate --data " + kFixture + " --estimator oracle");
  CHECK(plain_oracle.exit_code == 1);

  std::remove("cli_trial.csv");
  std::remove("cli_hist.csv");
}

TEST_CASE("simulate writes a deterministic metrics CSV") {
  std::remove("cli_sim.csv");
  const std::string args =
      "simulate --effect heterogeneous --n 60 --n-hist 300 --reps 4 "
      "--seed 5 --estimators unadjusted,oracle --learners " +
      kFastLearners + " --out cli_sim.csv";
  const auto first = run_cli(args);
  REQUIRE(first.exit_code == 0);
  CHECK(first.output.find("wrote cli_sim.csv") != std::string::npos);
  const std::string csv = slurp("cli_sim.csv");
  CHECK(csv.rfind("estimator,scenario,n,", 0) == 0);
  CHECK(csv.find("\nunadjusted,heterogeneous,60,") != std::string::npos);
  CHECK(csv.find("\noracle,heterogeneous,60,") != std::string::npos);

  const auto rerun = run_cli(args);
  REQUIRE(rerun.exit_code == 0);
  CHECK(slurp("cli_sim.csv") == csv);

  const auto parallel = run_cli(args + " --workers 3");
  REQUIRE(parallel.exit_code == 0);
  CHECK(slurp("cli_sim.csv") == csv);
  std::remove("cli_sim.csv");
}

TEST_CASE("sweep walks a custom grid and draws the chart") {
  std::remove("cli_sweep.csv");
  std::remove("cli_sweep.svg");
  const auto result = run_cli(
      "sweep --grid 50,60 --reps 3 --seed 5 --estimators unadjusted,oracle "
      "--learners " + kFastLearners +
      " --out cli_sweep.csv --svg cli_sweep.svg");
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp("cli_sweep.csv");
  CHECK(csv.find("\nunadjusted,heterogeneous,50,") != std::string::npos);
  CHECK(csv.find("\noracle,heterogeneous,60,") != std::string::npos);
  const std::string svg = slurp("cli_sweep.svg");
  CHECK(svg.rfind("<svg ", 0) == 0);
  CHECK(svg.find("coverage") != std::string::npos);
  std::remove("cli_sweep.csv");
  std::remove("cli_sweep.svg");
}

TEST_CASE("a JSON plan file configures a study") {
  {
    std::ofstream plan("cli_plan.json");
    plan << R"({
      "scenarios": [{"effect": "homogeneous", "n": 60, "n_hist": 200}],
      "estimators": ["unadjusted", "ancova"],
      "reps": 3, "master_seed": 11,
      "learners": [{"name": "mean"}]
    })";
  }
  const auto result =
      run_cli("simulate --config cli_plan.json --out cli_plan_out.csv");
  REQUIRE(result.exit_code == 0);
  const std::string csv = slurp("cli_plan_out.csv");
  CHECK(csv.find("\nunadjusted,homogeneous,60,") != std::string::npos);
  CHECK(csv.find("\nancova,homogeneous,60,") != std::string::npos);
  CHECK(csv.find("oracle") == std::string::npos);

  const auto missing =
      run_cli("simulate --config nowhere.json --out cli_plan_out.csv");
  CHECK(missing.exit_code == 1);
  std::remove("cli_plan.json");
  std::remove("cli_plan_out.csv");
}
