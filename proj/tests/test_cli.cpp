#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distlab/config.hpp"
#include "distlab/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("distlab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Outcome run(const std::string& args) {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + DISTLAB_CLI_PATH + "\" " + args + " > \"" + out.string() +
                            "\" 2> \"" + err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

const char* kSmallRun =
    R"({"experiment":"class_separation","trials":3,"test_size":200,"train":{"epochs":5},
        "sweep":{"separation":[1,2]}})";

}  // namespace

TEST_F(Cli, ListExperiments) {
  const auto r = run("list-experiments");
  EXPECT_EQ(r.code, 0);
  std::string expected;
  for (auto name : distlab::experiment_names()) expected += std::string(name) + "\n";
  EXPECT_EQ(r.out, expected);
}

TEST_F(Cli, Version) {
  const auto r = run("version");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("distlab ", 0), 0u);
}

TEST_F(Cli, ValidateConfig) {
  const auto good = write("good.json", R"({"experiment":"distortion"})");
  auto r = run("validate-config \"" + good.string() + "\"");
  EXPECT_EQ(r.code, 0);
  const auto bad = write("bad.json", R"({"experiment":"distortion","sweep":{"learningrate":[0.1]}})");
  r = run("validate-config \"" + bad.string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown sweep key 'learningrate'"), std::string::npos);
  const auto broken = write("broken.json", "{ not json");
  EXPECT_EQ(run("validate-config \"" + broken.string() + "\"").code, 1);
  EXPECT_EQ(run("validate-config \"" + (dir_ / "missing.json").string() + "\"").code, 1);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("run").code, 1);
  EXPECT_EQ(run("run --config").code, 1);
}

TEST_F(Cli, RuntimeErrorExitsTwo) {
  const auto cfg = write("dd.json", R"({"experiment":"double_distill","trials":1,"retrieval":{"data_path":")" +
                                        (dir_ / "absent.txt").string() + "\"}}");
  const auto r = run("run --config \"" + cfg.string() + "\" --out \"" + (dir_ / "o.csv").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, RunIsReproducibleAndWritesSidecar) {
  const auto cfg = write("run.json", kSmallRun);
  const fs::path a = dir_ / "a.csv";
  const fs::path b = dir_ / "b.csv";
  ASSERT_EQ(run("run --config \"" + cfg.string() + "\" --out \"" + a.string() + "\"").code, 0);
  ASSERT_EQ(run("run --config \"" + cfg.string() + "\" --out \"" + b.string() + "\" --jobs 2").code, 0);
  const std::string text = slurp(a);
  EXPECT_EQ(text, slurp(b));
  EXPECT_EQ(text.substr(0, text.find('\n')), "experiment,separation,trial,seed,metric,value");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 3 * 2);

  const std::string sidecar = slurp(a.string() + ".resolved.json");
  ASSERT_FALSE(sidecar.empty());
  const auto resolved = distlab::parse_config_text(sidecar);
  EXPECT_EQ(resolved.trials, 3u);
  EXPECT_EQ(resolved.test_size, 200u);
  // Rerunning from the sidecar reproduces the CSV.
  const fs::path c = dir_ / "c.csv";
  ASSERT_EQ(run("run --config \"" + a.string() + ".resolved.json\" --out \"" + c.string() + "\"").code, 0);
  EXPECT_EQ(slurp(c), text);
}

TEST_F(Cli, OverridesTakePrecedence) {
  const auto cfg = write("run.json", kSmallRun);
  const fs::path a = dir_ / "a.csv";
  ASSERT_EQ(run("run --config \"" + cfg.string() + "\" --out \"" + a.string() + "\" --trials 1 --seed 9").code, 0);
  const std::string text = slurp(a);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1 + 2 * 1 * 2);
  const auto resolved = distlab::parse_config_text(slurp(a.string() + ".resolved.json"));
  EXPECT_EQ(resolved.trials, 1u);
  EXPECT_EQ(resolved.base_seed, 9u);
}

TEST_F(Cli, StdoutWhenNoOutput) {
  const auto cfg = write("run.json", kSmallRun);
  const auto r = run("run --config \"" + cfg.string() + "\" --trials 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("experiment,separation,trial,seed,metric,value\n", 0), 0u);
}
