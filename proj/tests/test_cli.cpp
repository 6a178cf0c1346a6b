// End-to-end exercises of the command-line tool. The binary path arrives via
// the SPLOGSUM_CLI environment variable (set by the ctest registration), so
// these tests drive the same artifact a user would run.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

namespace fs = std::filesystem;

namespace {

const std::string& cli_path() {
  static const std::string path = [] {
    const char* env = std::getenv("SPLOGSUM_CLI");
    REQUIRE(env != nullptr);
    return std::string(env);
  }();
  return path;
}

// Fresh scratch directory per test case; removed on destruction so reruns
// never see stale outputs.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() /
          ("splogsum_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string sub(const std::string& leaf) const { return (dir / leaf).string(); }
};

int run_cli(const Scratch& s, const std::string& args) {
  const std::string log = s.sub("last_command.log");
  const std::string cmd =
      "\"" + cli_path() + "\" " + args + " > \"" + log + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

// Pulls one numeric field out of a metrics.csv row by column index.
double field(const std::string& row, std::size_t index) {
  std::istringstream in(row);
  std::string cell;
  for (std::size_t k = 0; k <= index; ++k) REQUIRE(std::getline(in, cell, ','));
  return std::stod(cell);
}

}  // namespace

TEST_CASE("simulate, fit and eval round trip through the filesystem", "[cli]") {
  Scratch s("roundtrip");
  REQUIRE(run_cli(s, "simulate --n 120 --p 15 --rho 0.2 --sigma 0.3 --seed 7 "
                     "--output-dir \"" + s.sub("sim") + "\" --quiet") == 0);
  REQUIRE(fs::exists(s.sub("sim") + "/dataset.csv"));
  REQUIRE(fs::exists(s.sub("sim") + "/truth.json"));

  // Fixed lambda, no held-out split: train metrics cover every row, so the
  // eval pass over the same CSV must reproduce the training AUC through the
  // destandardized coefficients in model.json.
  REQUIRE(run_cli(s, "fit --input \"" + s.sub("sim") + "/dataset.csv\" "
                     "--penalty logsum --lambda 0.002 --seed 7 "
                     "--output-dir \"" + s.sub("fit") + "\" --quiet") == 0);
  for (const char* name :
       {"model.json", "metrics.csv", "descriptors.csv", "drop_report.json"})
    REQUIRE(fs::exists(s.sub("fit") + "/" + name));

  const auto fit_metrics = lines_of(slurp(s.sub("fit") + "/metrics.csv"));
  REQUIRE(fit_metrics.size() == 2);
  CHECK(fit_metrics[0] ==
        "split,auc,accuracy,sensitivity,specificity,cutoff,tp,fp,tn,fn");
  REQUIRE(fit_metrics[1].substr(0, 6) == "train,");
  const double train_auc = field(fit_metrics[1], 1);
  CHECK(train_auc > 0.8);

  REQUIRE(run_cli(s, "eval --model \"" + s.sub("fit") + "/model.json\" "
                     "--input \"" + s.sub("sim") + "/dataset.csv\" "
                     "--output-dir \"" + s.sub("eval") + "\" --quiet") == 0);
  const auto eval_metrics = lines_of(slurp(s.sub("eval") + "/metrics.csv"));
  REQUIRE(eval_metrics.size() == 2);
  REQUIRE(eval_metrics[1].substr(0, 5) == "eval,");
  CHECK(field(eval_metrics[1], 1) == Catch::Approx(train_auc).margin(1e-12));
}

TEST_CASE("train/test split fit reports both rows and honors the penalty",
          "[cli]") {
  Scratch s("splitfit");
  REQUIRE(run_cli(s, "simulate --n 150 --p 12 --sigma 0.3 --seed 11 "
                     "--output-dir \"" + s.sub("sim") + "\" --quiet") == 0);
  REQUIRE(run_cli(s, "fit --input \"" + s.sub("sim") + "/dataset.csv\" "
                     "--penalty spl-logsum --lambda 0.002 --mu 0.5 "
                     "--max-ages 3 --test-fraction 0.3 --seed 11 "
                     "--output-dir \"" + s.sub("fit") + "\" --quiet") == 0);

  const auto metrics = lines_of(slurp(s.sub("fit") + "/metrics.csv"));
  REQUIRE(metrics.size() == 3);
  CHECK(metrics[1].substr(0, 6) == "train,");
  CHECK(metrics[2].substr(0, 5) == "test,");

  const auto history = lines_of(slurp(s.sub("fit") + "/spl_history.csv"));
  REQUIRE(history.size() >= 2);
  CHECK(history[0] == "age_index,gamma,selected_count,newly_added");

  const auto descriptors = lines_of(slurp(s.sub("fit") + "/descriptors.csv"));
  REQUIRE(!descriptors.empty());
  CHECK(descriptors[0] == "rank,name,coefficient,p_value");
}

TEST_CASE("identical invocations produce byte-identical outputs", "[cli]") {
  Scratch s("determinism");
  const std::string sim_flags = "simulate --n 90 --p 10 --rho 0.3 --sigma 0.4 "
                                "--label-noise 0.05 --seed 21 --quiet";
  REQUIRE(run_cli(s, sim_flags + " --output-dir \"" + s.sub("simA") + "\"") == 0);
  REQUIRE(run_cli(s, sim_flags + " --output-dir \"" + s.sub("simB") + "\"") == 0);
  CHECK(slurp(s.sub("simA") + "/dataset.csv") ==
        slurp(s.sub("simB") + "/dataset.csv"));
  CHECK(slurp(s.sub("simA") + "/truth.json") ==
        slurp(s.sub("simB") + "/truth.json"));

  // Cross-validated fit: exercises the fold assignment, the lambda path and
  // the serializers end to end.
  const std::string fit_flags =
      "fit --input \"" + s.sub("simA") + "/dataset.csv\" --penalty logsum "
      "--folds 4 --grid-size 6 --test-fraction 0.3 --seed 21 --quiet";
  REQUIRE(run_cli(s, fit_flags + " --output-dir \"" + s.sub("fitA") + "\"") == 0);
  REQUIRE(run_cli(s, fit_flags + " --output-dir \"" + s.sub("fitB") + "\"") == 0);
  for (const char* name : {"model.json", "cv.json", "metrics.csv",
                           "descriptors.csv", "drop_report.json"})
    CHECK(slurp(s.sub("fitA") + "/" + name) ==
          slurp(s.sub("fitB") + "/" + name));
}

TEST_CASE("config file supplies options and explicit flags override it",
          "[cli]") {
  Scratch s("config");
  {
    std::ofstream cfg(s.sub("run.toml"));
    cfg << "[simulate]\n"
        << "n = 60\n"
        << "p = 12\n"
        << "sigma = 0.25\n"
        << "seed = 3\n"
        << "quiet = true\n"
        << "output-dir = \"" << s.sub("out_cfg") << "\"\n";
  }
  // --config belongs to the top-level app, so it precedes the subcommand.
  REQUIRE(run_cli(s, "--config \"" + s.sub("run.toml") + "\" simulate") == 0);
  auto rows = lines_of(slurp(s.sub("out_cfg") + "/dataset.csv"));
  CHECK(rows.size() == 61);  // header + n
  CHECK(rows[0].substr(0, 6) == "label,");

  // Command line wins over the file for the options it repeats.
  REQUIRE(run_cli(s, "--config \"" + s.sub("run.toml") + "\" simulate "
                     "--n 40 --output-dir \"" + s.sub("out_flag") + "\"") == 0);
  CHECK(lines_of(slurp(s.sub("out_flag") + "/dataset.csv")).size() == 41);
}

TEST_CASE("failures exit with the documented status codes", "[cli]") {
  Scratch s("failures");

  // 2: flag-level problems, either unknown flags or rejected values.
  CHECK(run_cli(s, "fit --no-such-flag") == 2);
  CHECK(run_cli(s, "fit") == 2);  // --input is required

  REQUIRE(run_cli(s, "simulate --n 40 --p 10 --seed 5 "
                     "--output-dir \"" + s.sub("sim") + "\" --quiet") == 0);
  CHECK(run_cli(s, "fit --input \"" + s.sub("sim") + "/dataset.csv\" "
                   "--penalty bogus --lambda 0.1 --quiet "
                   "--output-dir \"" + s.sub("x1") + "\"") == 2);
  CHECK(run_cli(s, "fit --input \"" + s.sub("sim") + "/dataset.csv\" "
                   "--penalty logsum --lambda -1 --quiet "
                   "--output-dir \"" + s.sub("x2") + "\"") == 2);

  // 3: data problems (missing file, malformed cell, unknown label column).
  CHECK(run_cli(s, "fit --input \"" + s.sub("nowhere.csv") + "\" "
                   "--lambda 0.1 --quiet "
                   "--output-dir \"" + s.sub("x3") + "\"") == 3);
  {
    std::ofstream bad(s.sub("bad.csv"));
    bad << "label,x1,x2\n1,0.5,oops\n0,1.5,2.0\n";
  }
  CHECK(run_cli(s, "fit --input \"" + s.sub("bad.csv") + "\" --lambda 0.1 "
                   "--quiet --output-dir \"" + s.sub("x4") + "\"") == 3);
  CHECK(run_cli(s, "fit --input \"" + s.sub("sim") + "/dataset.csv\" "
                   "--label wrong_column --lambda 0.1 --quiet "
                   "--output-dir \"" + s.sub("x5") + "\"") == 3);
  CHECK(run_cli(s, "eval --model \"" + s.sub("missing_model.json") + "\" "
                   "--input \"" + s.sub("sim") + "/dataset.csv\" "
                   "--quiet --output-dir \"" + s.sub("x6") + "\"") == 3);
}
