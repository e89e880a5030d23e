#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("mcid_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  CliResult invoke(const std::string& args) const {
    const std::string err_file = path("stderr.txt");
    const std::string cmd = std::string(MCID_CLI_PATH) + " " + args + " 2>" + err_file;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int status = ::pclose(pipe);
    std::ifstream ef(err_file);
    std::stringstream err;
    err << ef.rdbuf();
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out, err.str()};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitPopulationToyJson) {
  const auto csv = write("toy.csv", "x,y\n1,1\n2,1\n0,-1\n");
  const auto r = invoke("--json fit-population " + csv);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "fit-population");
  EXPECT_EQ(j["config"]["input"], csv);
  EXPECT_EQ(j["result"]["c_hat"].get<double>(), 1.0);
  EXPECT_EQ(j["result"]["empirical_risk"].get<double>(), 0.0);
}

TEST_F(Cli, PlainOutputIsNotJson) {
  const auto csv = write("toy.csv", "x,y\n1,1\n2,1\n0,-1\n");
  const auto r = invoke("fit-population " + csv);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("c_hat: 1"), std::string::npos);
  EXPECT_FALSE(nlohmann::json::accept(r.out));
}

TEST_F(Cli, MalformedRowExitsWithInputError) {
  const auto csv = write("bad.csv", "x,y\n1,1\n2,oops\n");
  const auto r = invoke("fit-population " + csv);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, InputErrors) {
  EXPECT_EQ(invoke("fit-population " + path("missing.csv")).code, 2);
  EXPECT_EQ(invoke("--bogus-flag fit-population x.csv").code, 2);
  EXPECT_EQ(invoke("").code, 2);
  const auto csv = write("toy.csv", "x,y\n1,1\n2,1\n0,-1\n");
  EXPECT_EQ(invoke("fit-weighted " + csv + " --w 1.5").code, 2);
  EXPECT_EQ(invoke("fit-np " + csv + " --alpha 0").code, 2);
  EXPECT_EQ(invoke("fit-np " + write("pos.csv", "x,y\n1,1\n") + " --alpha 0.1").code, 2);
  EXPECT_EQ(invoke("simulate --scenario pop1 --method personalized-linear --reps 1").code, 2);
}

TEST_F(Cli, ZeroOneLabels) {
  const auto csv = write("zo.csv", "x,y\n1,1\n2,1\n0,0\n");
  EXPECT_EQ(invoke("fit-population " + csv).code, 2);
  const auto r = invoke("--json --zero-one-labels fit-population " + csv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["result"]["c_hat"].get<double>(), 1.0);
}

TEST_F(Cli, WeightedAndNeymanPearson) {
  const auto csv = write("np.csv", "x,y\n0,-1\n1,-1\n2,1\n");
  auto r = invoke("--json fit-np " + csv + " --alpha 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["c_hat"].get<double>(), 1.0);
  EXPECT_EQ(j["config"]["alpha"].get<double>(), 0.5);
  r = invoke("--json fit-weighted " + csv + " --w 0.3");
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["c_hat"].get<double>(), 2.0);
}

TEST_F(Cli, FitPersonalizedThenPredict) {
  const auto train = mcid::generate({mcid::ScenarioId::Pers1, 80, 5, 3});
  {
    std::ofstream f(path("train.csv"));
    mcid::write_dataset(train.first, f);
    std::ofstream g(path("test.csv"));
    mcid::write_dataset(train.second, g);
  }
  const auto model = path("model.txt");
  auto r = invoke("--json fit-personalized " + path("train.csv") +
               " --kernel gaussian --delta 0.1 --lambda 0.05 --seed 1 --model-out " + model);
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["result"]["lambda"].get<double>(), 0.05);
  EXPECT_EQ(j["config"]["kernel"]["kind"], "gaussian");
  EXPECT_TRUE(j["config"]["kernel"]["sigma2"].is_number());
  const auto trace = j["result"]["objective_trace"].get<std::vector<double>>();
  EXPECT_LE(mcid::testing::worst_increase(trace), 1e-10);

  std::ifstream mf(model);
  const auto loaded = mcid::load_model(mf);
  r = invoke("--json predict --model " + model + " " + path("test.csv"));
  ASSERT_EQ(r.code, 0) << r.err;
  j = nlohmann::json::parse(r.out);
  const auto& rows = j["result"]["predictions"];
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(rows[i]["c_hat"].get<double>(), loaded.predict(train.second[i].z));
    EXPECT_EQ(rows[i]["label"].get<int>(), mcid::sign_pos(train.second[i].x - loaded.predict(train.second[i].z)));
  }

  // covariates only: no labels column in the output
  const auto zcsv = write("z.csv", "z1,z2\n0.5,-1\n");
  r = invoke("predict --model " + model + " " + zcsv);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "row,c_hat");
  EXPECT_EQ(invoke("predict --model " + model + " " + write("z3.csv", "z1,z2,z3\n1,2,3\n")).code, 2);
}

TEST_F(Cli, FitPersonalizedWithCv) {
  const auto train = mcid::generate({mcid::ScenarioId::Pers1, 60, 1, 4}).first;
  {
    std::ofstream f(path("train.csv"));
    mcid::write_dataset(train, f);
  }
  const auto r = invoke("--json --out " + path("report.json") + " fit-personalized " + path("train.csv") +
                     " --kernel linear --lambda cv --folds 3 --seed 2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path("report.json"));
  const auto j = nlohmann::json::parse(f);
  EXPECT_EQ(j["result"]["cv"]["table"].size(), 61u);
  EXPECT_EQ(j["result"]["cv"]["best_lambda"].get<double>(), j["result"]["lambda"].get<double>());
  EXPECT_EQ(j["result"]["slope"].size(), 2u);
}

TEST_F(Cli, SimulatePop1) {
  const auto r = invoke("--json simulate --scenario pop1 --n 1000 --reps 100 --seed 5");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j["result"]["mean_mce"].get<double>(), 0.26);
  EXPECT_EQ(j["result"]["reps"].size(), 100u);
  EXPECT_EQ(j["config"]["method"], "population");
  // same seed, same report
  const auto again = nlohmann::json::parse(invoke("--json simulate --scenario pop1 --n 1000 --reps 100 --seed 5").out);
  EXPECT_EQ(j["result"]["mean_c_hat"], again["result"]["mean_c_hat"]);
}

TEST_F(Cli, DemoInconsistency) {
  const auto r = invoke("demo-inconsistency");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "loss,minimizer,gap");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
}

TEST_F(Cli, SensitivityDeltaCsv) {
  const auto r = invoke("sensitivity-delta --n 100 --n-test 200 --seed 3 --deltas 0.1,1");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 6), "delta,");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2);
}
