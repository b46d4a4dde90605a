#include "kernsdr/io.hpp"
#include "kernsdr/kernsdr.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>

using namespace kernsdr;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code;
    std::string out;
};

RunResult run_cli(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd '" + dir.string() + "' && '" KERNSDR_CLI_PATH "' --quiet " + args + " 2>&1";
    RunResult r{-1, {}};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[512];
    while (std::fgets(buf, sizeof buf, pipe)) r.out += buf;
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("kernsdr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateReportsCalibratedCensoring) {
    const RunResult r = run_cli(dir_, "simulate --model 2 --censoring 0.2 --seed 7 --out-prefix sim");
    ASSERT_EQ(r.code, 0) << r.out;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, std::regex("achieved \\(calibration sample\\) ([0-9.eE+-]+)"))) << r.out;
    const double achieved = std::stod(m[1]);
    EXPECT_GE(achieved, 0.18);
    EXPECT_LE(achieved, 0.22);
    EXPECT_TRUE(fs::exists(dir_ / "sim_train.csv"));
}

TEST_F(Cli, TransformOnTrainingDataGivesInSampleScores) {
    ASSERT_EQ(run_cli(dir_, "simulate --model 1 --n-train 60 --n-test 20 --p 20 --censoring 0.3 --seed 3 --out-prefix s").code, 0);
    const RunResult f = run_cli(dir_, "fit --data s_train.csv --kernel linear --tau ref --s ref --q 2 --out model.json");
    ASSERT_EQ(f.code, 0) << f.out;
    ASSERT_EQ(run_cli(dir_, "transform --model model.json --data s_train.csv --out scores.csv").code, 0);

    const SurvivalDataset data = read_dataset((dir_ / "s_train.csv").string());
    const SdrModel model = load_model((dir_ / "model.json").string());
    const MatrixXd in_sample = gram(data.X, model.kernel).centered * model.alphas;
    const MatrixXd scores = read_matrix_csv((dir_ / "scores.csv").string());
    ASSERT_EQ(scores.rows(), in_sample.rows());
    ASSERT_EQ(scores.cols(), in_sample.cols());
    EXPECT_LT((scores - in_sample).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + in_sample.cwiseAbs().maxCoeff()));
}

TEST_F(Cli, EvaluateIdenticalFilesGivesOne) {
    ASSERT_EQ(run_cli(dir_, "simulate --model 2 --n-test 50 --seed 4 --out-prefix s").code, 0);
    const RunResult r = run_cli(dir_, "evaluate --estimated s_truth.csv --truth s_truth.csv --out rmae.json");
    ASSERT_EQ(r.code, 0) << r.out;
    std::ifstream in(dir_ / "rmae.json");
    const auto j = nlohmann::json::parse(in);
    EXPECT_NEAR(j.at("value").get<double>(), 1.0, 1e-9);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run_cli(dir_, "fit --data missing.csv --out x.json").code, 2);
    EXPECT_EQ(run_cli(dir_, "simulate --model 9").code, 2);
    EXPECT_EQ(run_cli(dir_, "no-such-command").code, 2);
}
