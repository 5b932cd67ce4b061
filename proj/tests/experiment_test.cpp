#include "adfsdca/experiment.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "adfsdca/libsvm.hpp"
#include "adfsdca/metrics.hpp"
#include "adfsdca/synthetic.hpp"

namespace adfsdca {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class ExperimentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("adfsdca_experiment_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    data_ = (dir_ / "train.svm").string();
    std::ofstream out(data_);
    write_libsvm(out, make_synthetic({.samples = 60, .features = 12, .density = 0.5, .seed = 2}));
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, std::string *err_text = nullptr) {
    std::ostringstream out, err;
    const int code = cli_main(args, out, err);
    if (err_text) *err_text = err.str();
    return code;
  }

  fs::path dir_;
  std::string data_;
};

TEST(ParseVariant, Examples) {
  auto v = parse_variant("adfsdca", ThetaMode::PerIteration, Regime::AllConvex);
  EXPECT_TRUE(std::holds_alternative<AdfSdca>(v.variant));
  EXPECT_EQ(v.label, "adfsdca");

  v = parse_variant("plus:s=10", ThetaMode::PerIteration, Regime::AllConvex);
  EXPECT_EQ(std::get<AdfSdcaPlus>(v.variant).shrink, 10.0);
  EXPECT_EQ(v.label, "plus-s10");

  v = parse_variant("minibatch:b=8,theta=fixed", ThetaMode::PerIteration, Regime::AllConvex);
  EXPECT_EQ(std::get<MiniBatch>(v.variant).batch, 8);
  EXPECT_EQ(v.theta_mode, ThetaMode::FixedThetaStar);
  EXPECT_EQ(v.label, "minibatch-b8-fixed");

  v = parse_variant("uniform:regime=average", ThetaMode::FixedThetaStar, Regime::AllConvex);
  EXPECT_EQ(v.regime, Regime::AverageConvex);
  EXPECT_EQ(v.theta_mode, ThetaMode::FixedThetaStar);
  EXPECT_EQ(v.label, "uniform-fixed-avg");
}

TEST(ParseVariant, Rejects) {
  for (const char *bad : {"sdca", "plus", "plus:s=0.5", "plus:s=abc", "minibatch",
                          "minibatch:b=0", "adfsdca:theta=big", "adfsdca:colour=red"}) {
    EXPECT_THROW(parse_variant(bad, ThetaMode::PerIteration, Regime::AllConvex), UsageError)
        << bad;
  }
}

TEST(ParseArgs, DefaultsAndFlags) {
  auto spec = parse_args({"--data", "a.svm", "--variant", "adfsdca"});
  EXPECT_EQ(spec.data_path, "a.svm");
  EXPECT_FALSE(spec.lambda);
  EXPECT_EQ(spec.epochs, 30);
  EXPECT_EQ(spec.seeds, std::vector<std::uint64_t>{42});
  EXPECT_TRUE(spec.timing);

  spec = parse_args({"--data", "a.svm", "--variant", "plus:s=10", "--variant", "uniform",
                     "--loss", "logistic", "--lambda", "1e-3", "--seed", "1", "--seed", "2",
                     "--epochs", "5", "--no-timing", "--jobs", "3", "--theta", "fixed"});
  EXPECT_EQ(spec.loss, LossKind::Logistic);
  EXPECT_EQ(*spec.lambda, 1e-3);
  ASSERT_EQ(spec.variants.size(), 2u);
  EXPECT_EQ(spec.variants[1].label, "uniform-fixed");
  EXPECT_EQ(spec.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(spec.epochs, 5);
  EXPECT_FALSE(spec.timing);
  EXPECT_EQ(spec.jobs, 3);
}

TEST(ParseArgs, ErrorsNameTheFlag) {
  const std::vector<std::pair<std::vector<std::string>, std::string>> cases = {
      {{"--variant", "adfsdca"}, "--data"},
      {{"--data", "a", "--variant", "adfsdca", "--lambda", "-1"}, "--lambda"},
      {{"--data", "a", "--variant", "adfsdca", "--lambda", "x"}, "--lambda"},
      {{"--data", "a", "--variant", "adfsdca", "--loss", "hinge"}, "--loss"},
      {{"--data", "a", "--variant", "adfsdca", "--epochs", "-2"}, "--epochs"},
      {{"--data", "a", "--variant", "adfsdca", "--jobs", "0"}, "--jobs"},
      {{"--data", "a", "--variant", "plus:s=0.5"}, "--variant"},
      {{"--data", "a"}, "--variant"},
      {{"--data", "a", "--variant", "adfsdca", "--variant", "adfsdca"}, "--variant"},
      {{"--data", "a", "--variant", "adfsdca", "--seed", "3", "--seed", "3"}, "--seed"},
  };
  for (const auto &[args, flag] : cases) {
    try {
      parse_args(args);
      ADD_FAILURE() << "accepted " << flag;
    } catch (const UsageError &e) {
      EXPECT_NE(std::string(e.what()).find(flag), std::string::npos) << e.what();
    }
  }
  EXPECT_THROW(parse_args({"--data", "a", "--variant", "adfsdca", "--bogus", "1"}), UsageError);
}

TEST_F(ExperimentTest, ConfigFileWithOverrides) {
  const auto cfg = dir_ / "run.cfg";
  std::ofstream(cfg) << "# experiment\ndata=" << data_
                     << "\nvariant=adfsdca\nvariant=uniform\nlambda=0.5\n--epochs=7\n";
  const auto spec = parse_args({"--config", cfg.string(), "--lambda", "0.25"});
  EXPECT_EQ(spec.data_path, data_);
  EXPECT_EQ(*spec.lambda, 0.25);
  EXPECT_EQ(spec.epochs, 7);
  EXPECT_EQ(spec.variants.size(), 2u);

  std::ofstream(dir_ / "bad.cfg") << "data=x\nvariant=adfsdca\nspeed=3\n";
  try {
    parse_args({"--config", (dir_ / "bad.cfg").string()});
    FAIL();
  } catch (const UsageError &e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
  }
}

TEST_F(ExperimentTest, WritesOneCsvPerRunAndASummary) {
  const auto out = dir_ / "out";
  ASSERT_EQ(run({"--data", data_, "--variant", "adfsdca", "--variant", "minibatch:b=4",
                 "--seed", "1", "--seed", "2", "--seed", "3", "--epochs", "40",
                 "--gap-tol", "1e-6", "--lambda", "0.05", "--out", out.string()}),
            0);
  for (const char *label : {"adfsdca", "minibatch-b4"}) {
    for (int seed = 1; seed <= 3; ++seed) {
      const auto p = out / (std::string(label) + "_" + std::to_string(seed) + ".csv");
      ASSERT_TRUE(fs::exists(p)) << p;
      std::ifstream in(p);
      const auto records = read_csv(in);
      ASSERT_GE(records.size(), 2u);
      EXPECT_EQ(records.front().epoch, 0.0);
      EXPECT_LE(records.back().gap, 1e-6);
    }
  }
  std::ifstream summary(out / "summary.csv");
  std::string line;
  std::getline(summary, line);
  EXPECT_EQ(line, "variant,seed,epochs_to_tol,final_epoch,final_gap,status");
  int runs = 0, medians = 0;
  while (std::getline(summary, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 6u) << line;
    const double epochs = std::stod(f[2]);
    EXPECT_TRUE(std::isfinite(epochs)) << line;
    EXPECT_GT(epochs, 0.0);
    if (f[1] == "median") {
      ++medians;
    } else {
      ++runs;
      EXPECT_EQ(f[5], "gap_reached");
    }
  }
  EXPECT_EQ(runs, 6);
  EXPECT_EQ(medians, 2);
}

TEST_F(ExperimentTest, NoTimingOutputIsByteIdentical) {
  auto invoke = [&](const std::string &sub, const std::string &jobs) {
    EXPECT_EQ(run({"--data", data_, "--variant", "plus:s=10", "--variant", "minibatch:b=3",
                   "--variant", "uniform", "--seed", "5", "--seed", "6", "--epochs", "4",
                   "--checks-per-epoch", "3", "--no-timing", "--jobs", jobs, "--out",
                   (dir_ / sub).string()}),
              0);
  };
  invoke("a", "1");
  invoke("b", "1");
  invoke("c", "4");
  std::size_t compared = 0;
  for (const auto &entry : fs::directory_iterator(dir_ / "a")) {
    const auto name = entry.path().filename();
    const std::string a = slurp(entry.path());
    EXPECT_EQ(a, slurp(dir_ / "b" / name)) << name;
    EXPECT_EQ(a, slurp(dir_ / "c" / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, 7u);
}

TEST_F(ExperimentTest, UnreadableDataNamesThePath) {
  const std::string missing = (dir_ / "nope.svm").string();
  std::string err;
  EXPECT_EQ(run({"--data", missing, "--variant", "adfsdca", "--out", (dir_ / "o").string()}, &err),
            1);
  EXPECT_NE(err.find(missing), std::string::npos) << err;

  std::ofstream(dir_ / "broken.svm") << "1 1:0.5\n-1 2:abc\n";
  EXPECT_EQ(run({"--data", (dir_ / "broken.svm").string(), "--variant", "adfsdca", "--out",
                 (dir_ / "o").string()},
                &err),
            1);
  EXPECT_NE(err.find("broken.svm"), std::string::npos) << err;
  EXPECT_NE(err.find("line 2"), std::string::npos) << err;
}

TEST_F(ExperimentTest, UsageErrorsExitWithTwo) {
  std::string err;
  EXPECT_EQ(run({"--data", data_, "--variant", "plus:s=0.5"}, &err), 2);
  EXPECT_NE(err.find("usage:"), std::string::npos);
  EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(ExperimentTest, BinaryExitCodes) {
  const std::string cli = ADFSDCA_CLI_PATH;
  auto sh = [&](const std::string &args) {
    const int status = std::system((cli + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(sh("--data " + data_ + " --variant adfsdca --epochs 2 --out " + (dir_ / "o").string()), 0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "adfsdca_42.csv"));
  EXPECT_EQ(sh("--data " + (dir_ / "missing").string() + " --variant adfsdca"), 1);
  EXPECT_EQ(sh("--data " + data_ + " --variant nothing"), 2);
  EXPECT_EQ(sh("--help"), 0);
}

}  // namespace
}  // namespace adfsdca
