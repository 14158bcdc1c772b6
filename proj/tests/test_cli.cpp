#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "synthetic.hpp"
#include "temp_file.hpp"

namespace fairkm {
namespace {

using testing::TempFile;

struct Outcome {
  int exit_code = -1;
  std::string out;
};

// Runs the CLI with the given arguments; stderr is discarded.
Outcome cli(const std::string& args) {
  const std::string cmd = std::string(FAIRKM_CLI_PATH) + " " + args + " 2>/dev/null";
  Outcome o;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return o;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.out.append(buf, got);
  const int status = ::pclose(pipe);
  o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

std::string input_args(const TempFile& f) { return "--input " + f.path().string() + " --sensitive-col g"; }

class Cli : public ::testing::Test {
 protected:
  TempFile data{testing::to_csv(testing::imbalanced_pair(6, 100, 3.0).data)};
};

TEST_F(Cli, MissingSensitiveColumnIsUsageError) {
  EXPECT_EQ(cli("run --input " + data.path().string() + " --k 2").exit_code, 2);
  EXPECT_EQ(cli("").exit_code, 2);
  EXPECT_EQ(cli("run " + input_args(data) + " --k 2 --heuristic fancy").exit_code, 2);
}

TEST_F(Cli, HelpExitsZero) { EXPECT_EQ(cli("--help").exit_code, 0); }

TEST_F(Cli, DataErrorsExitOne) {
  EXPECT_EQ(cli("run --input /nonexistent.csv --sensitive-col g --k 2").exit_code, 1);
  EXPECT_EQ(cli("run --input " + data.path().string() + " --sensitive-col nope --k 2").exit_code, 1);
  EXPECT_EQ(cli("run " + input_args(data) + " --k 500").exit_code, 1);
}

TEST_F(Cli, BothHeuristicsLowerFairness) {
  const auto r = cli("run " + input_args(data) + " --k 2 --heuristic both");
  ASSERT_EQ(r.exit_code, 0);
  const auto json = nlohmann::json::parse(r.out);
  const double base = json["baseline"]["fairness"];
  EXPECT_LT(json["adjusted"]["near_foreign"]["fairness"].get<double>(), base);
  EXPECT_LT(json["adjusted"]["gini"]["fairness"].get<double>(), base);
}

TEST_F(Cli, NoneOmitsAdjustedSection) {
  const auto r = cli("run " + input_args(data) + " --k 2 --heuristic none");
  ASSERT_EQ(r.exit_code, 0);
  const auto json = nlohmann::json::parse(r.out);
  EXPECT_TRUE(json.contains("baseline"));
  EXPECT_FALSE(json.contains("adjusted"));
}

TEST_F(Cli, ReportsAreByteIdentical) {
  const std::string args = "run " + input_args(data) + " --k 3 --seed 9";
  const auto a = cli(args), b = cli(args);
  ASSERT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, CsvFormatAndOutputFile) {
  TempFile out("", ".csv");
  ASSERT_EQ(cli("run " + input_args(data) + " --k 2 --format csv --output " + out.path().string()).exit_code, 0);
  std::ifstream in(out.path());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "method,fairness,kappa,switches,termination");
}

TEST_F(Cli, TimingIsOptIn) {
  const auto r = cli("run " + input_args(data) + " --k 2 --timing");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(nlohmann::json::parse(r.out).contains("timing_seconds"));
}

TEST_F(Cli, SweepRows) {
  const auto r = cli("sweep " + input_args(data) + " --k 2 --knn-sweep 5,10,15");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 4);
}

TEST_F(Cli, SweepRejectsLargeNeighbourhood) {
  EXPECT_EQ(cli("sweep " + input_args(data) + " --k 2 --knn-sweep 5,200").exit_code, 1);
}

TEST(CliBench, EmptyManifest) {
  TempFile manifest("");
  const auto r = cli("bench --manifest " + manifest.path().string());
  EXPECT_EQ(r.exit_code, 0);
}

TEST(CliBench, UnreadablePathIsReported) {
  TempFile a(testing::to_csv(testing::imbalanced_pair(1, 40, 3.0).data));
  TempFile b(testing::to_csv(testing::imbalanced_pair(2, 40, 3.0).data));
  TempFile manifest("path,sensitive_col,k\n" + a.path().string() + ",g,2\n/nonexistent/gone.csv,g,2\n" +
                    b.path().string() + ",g,2\n");
  const auto r = cli("bench --manifest " + manifest.path().string());
  EXPECT_NE(r.exit_code, 0);
  EXPECT_NE(r.out.find(a.path().stem().string()), std::string::npos);
  EXPECT_NE(r.out.find(b.path().stem().string()), std::string::npos);
  EXPECT_NE(r.out.find("error: gone"), std::string::npos);
}

}  // namespace
}  // namespace fairkm
