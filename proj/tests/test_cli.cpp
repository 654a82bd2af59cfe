#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coinc/cli.hpp"
#include "coinc/parallel.hpp"

using namespace coinc;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("coinc_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  int run_quiet(const RunConfig& config) {
    out_.str("");
    err_.str("");
    return run(config, out_, err_);
  }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(CliTest, SimulateIsDeterministicAndRoundTrips) {
  const auto cfg = write("gen.cfg", "model = bernoulli\np = 0.05\nhorizon = 400\nchannels = 3\nseed = 9\n");
  for (const auto format : {EventFormat::timestamps, EventFormat::dense}) {
    RunConfig config;
    config.command = Command::simulate;
    config.inputs = {cfg};
    config.format = format;
    config.output = path("a.txt");
    ASSERT_EQ(run_quiet(config), kExitOk) << err_.str();
    config.output = path("b.txt");
    ASSERT_EQ(run_quiet(config), kExitOk);
    EXPECT_EQ(read(path("a.txt")), read(path("b.txt")));
    EXPECT_EQ(read(path("a.txt.meta.json")), read(path("b.txt.meta.json")));

    const auto expected = generate({BernoulliModel{0.05, 400}, 9, 3});
    EXPECT_EQ(ingest_events(path("a.txt"), format).recording.channels(), expected);
    const auto meta = nlohmann::json::parse(read(path("a.txt.meta.json")));
    EXPECT_EQ(meta["seed"], 9);
    EXPECT_EQ(meta["channels"].size(), 3u);
  }
  RunConfig reseeded;
  reseeded.command = Command::simulate;
  reseeded.inputs = {cfg};
  reseeded.output = path("c.txt");
  reseeded.seed = 10;
  ASSERT_EQ(run_quiet(reseeded), kExitOk);
  EXPECT_NE(read(path("a.txt")), read(path("c.txt")));
}

TEST_F(CliTest, AnalyzeNullProfileIsCentered) {
  // Pooled over many independent pairs, the z column averages near zero.
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 3000; ++seed) {
    const auto x = gen_bernoulli(0.05, 1000, derive_seed(seed, 1));
    const auto y = gen_bernoulli(0.05, 1000, derive_seed(seed, 2));
    std::ostringstream events;
    write_events(events, Recording({x, y}, {"x", "y"}), EventFormat::timestamps);
    RunConfig config;
    config.command = Command::analyze;
    config.inputs = {write("pair.txt", events.str())};
    config.max_lag = 10;
    ASSERT_EQ(run_quiet(config), kExitOk) << err_.str();
    std::istringstream csv(out_.str());
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
      std::stringstream row(line);
      std::string cell;
      for (int c = 0; c < 5; ++c) std::getline(row, cell, ',');
      sum += std::stod(cell);
      ++count;
    }
  }
  EXPECT_EQ(count, 3000u * 11u);
  EXPECT_LT(std::abs(sum / static_cast<double>(count)), 0.05);
}

TEST_F(CliTest, AnalyzeSelectsPairAndWritesFile) {
  const auto rec = write("rec.txt", "T=20\na 1\nb 2\nc 3\na 10\nc 11\n");
  RunConfig config;
  config.command = Command::analyze;
  config.inputs = {rec};
  config.lags = "0..2";
  EXPECT_EQ(run_quiet(config), kExitUsage);
  config.pair = std::pair<std::string, std::string>{"a", "c"};
  config.output = path("profile.csv");
  ASSERT_EQ(run_quiet(config), kExitOk) << err_.str();
  const auto csv = read(path("profile.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lag,observed,expected,sigma_sqrtT,z,dz");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_FALSE(fs::exists(path("profile.csv.partial")));
}

TEST_F(CliTest, ScreenWritesEdgesAndMetadata) {
  const auto rec = write("rec.txt", "a 0110011000\nb 0110011001\nsilent 0000000000\n");
  RunConfig config;
  config.command = Command::screen;
  config.inputs = {rec};
  config.format = EventFormat::dense;
  config.lags = "0,1";
  config.threshold = 0.5;
  config.output = path("edges.csv");
  ASSERT_EQ(run_quiet(config), kExitOk) << err_.str();
  const auto csv = read(path("edges.csv"));
  EXPECT_NE(csv.find("a,b,0,"), std::string::npos);
  const auto meta = nlohmann::json::parse(read(path("edges.csv.meta.json")));
  EXPECT_EQ(meta["pair_count"], 3);
  EXPECT_EQ(meta["tests_per_pair"], 2);
  EXPECT_EQ(meta["undefined_pairs"].size(), 2u);
}

TEST_F(CliTest, DataErrorsAreReportedAndLeaveNoOutput) {
  RunConfig config;
  config.command = Command::analyze;
  config.inputs = {write("bad.txt", "T=5\n7\n")};
  config.output = path("out.csv");
  EXPECT_EQ(run_quiet(config), kExitData);
  const auto record = nlohmann::json::parse(err_.str());
  EXPECT_EQ(record["error"], "parse");
  EXPECT_EQ(record["line"], 2);
  EXPECT_FALSE(fs::exists(path("out.csv")));
  EXPECT_FALSE(fs::exists(path("out.csv.partial")));

  config.inputs = {write("empty.txt", "")};
  EXPECT_EQ(run_quiet(config), kExitData);
  EXPECT_EQ(nlohmann::json::parse(err_.str())["error"], "data");

  config.command = Command::simulate;
  config.inputs = {write("gen.cfg", "model = bernoulli\np = 2\nhorizon = 10\n")};
  EXPECT_EQ(run_quiet(config), kExitData);
  EXPECT_FALSE(fs::exists(path("out.csv")));
  EXPECT_FALSE(fs::exists(path("out.csv.meta.json")));
}

TEST_F(CliTest, UsageErrors) {
  RunConfig config;
  config.command = Command::analyze;
  config.inputs = {write("rec.txt", "T=5\nx 1\ny 2\n")};
  config.lags = "0";
  config.max_lag = 3;
  EXPECT_EQ(run_quiet(config), kExitUsage);
  EXPECT_EQ(nlohmann::json::parse(err_.str())["error"], "usage");

  RunConfig simulate;
  simulate.command = Command::simulate;
  simulate.inputs = {config.inputs[0]};
  EXPECT_EQ(run_quiet(simulate), kExitUsage);

  RunConfig validate;
  validate.command = Command::validate;
  validate.criteria = {99};
  EXPECT_EQ(run_quiet(validate), kExitUsage);

  RunConfig workers;
  workers.command = Command::validate;
  workers.workers = 0;
  EXPECT_EQ(run_quiet(workers), kExitUsage);
}

TEST_F(CliTest, ValidateWritesReports) {
  RunConfig config;
  config.command = Command::validate;
  config.criteria = {10};
  config.output = path("reports");
  ASSERT_EQ(run_quiet(config), kExitOk) << err_.str();
  EXPECT_EQ(out_.str().rfind("PASS criterion 10", 0), 0u);
  const auto report = nlohmann::json::parse(read(path("reports") / "criterion_10.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_EQ(report["results"]["levels"].size(), 3u);
  EXPECT_TRUE(fs::exists(path("reports") / "summary.json"));
}
