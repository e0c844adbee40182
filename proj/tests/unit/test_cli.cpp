#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "gait_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Result run(const std::string& args) {
  const char* bin = std::getenv("GAITPROP_BIN");
  if (!bin) return {};
  const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string("'") + bin + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!std::getenv("GAITPROP_BIN")) GTEST_SKIP() << "GAITPROP_BIN not set";
  }
};

}  // namespace

TEST_F(Cli, TrainOnTeacherWritesRecord) {
  const fs::path out = scratch() / "train";
  const Result r = run("train --seed 1 --out " + out.string() +
                       " --set dataset=teacher --set width=8 --set hidden_layers=1 --set classes=2"
                       " --set epochs=1 --set teacher_train=64 --set teacher_test=32 --set workers=1");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "run.json"));
  const auto j = nlohmann::json::parse(slurp(out / "run.json"));
  EXPECT_EQ(j["config"]["seed"], "1");
  const Result inspect = run("checkpoint-inspect " + (out / "model.gaitnet").string());
  ASSERT_EQ(inspect.status, 0) << inspect.err;
  EXPECT_EQ(nlohmann::json::parse(inspect.out)["depth"], 2);
}

TEST_F(Cli, ErrorsCarryKindAndExitOne) {
  Result r = run("train --set bogus=1");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("error[InvalidArgument]"), std::string::npos) << r.err;

  r = run("train --set dataset=idx --set train_images=/nonexistent/x");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("error[Idx"), std::string::npos) << r.err;

  const fs::path junk = scratch() / "junk.gaitnet";
  std::ofstream(junk) << "not a checkpoint";
  r = run("checkpoint-inspect " + junk.string());
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("error[FormatError]"), std::string::npos) << r.err;
}

TEST_F(Cli, UsageErrorsAreNonZero) {
  EXPECT_NE(run("no-such-command").status, 0);
  EXPECT_NE(run("equilibrium --nus abc").status, 0);
}

TEST_F(Cli, EquilibriumPrintsCsv) {
  const Result r = run("equilibrium --nus 0,0.2 --size 3 --duration 20 --onset 10");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, 3), "nu,");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST_F(Cli, DatagenThenTrainOnIdx) {
  const fs::path data = scratch() / "teacher";
  Result r = run("datagen --width 16 --classes 4 --train 100 --test 50 --out " + data.string());
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(fs::exists(data / "train-images-idx3-ubyte"));
  r = run("train --set width=16 --set classes=4 --set hidden_layers=1 --set epochs=1 --set workers=1"
          " --set train_images=" + (data / "train-images-idx3-ubyte").string() +
          " --set train_labels=" + (data / "train-labels-idx1-ubyte").string() +
          " --set test_images=" + (data / "t10k-images-idx3-ubyte").string() +
          " --set test_labels=" + (data / "t10k-labels-idx1-ubyte").string());
  EXPECT_EQ(r.status, 0) << r.err;
}
