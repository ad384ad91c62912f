#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using legendre::cli::run;
using json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "legendre");
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("legendre_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  static std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, DecomposeWritesResultAndReconstruction) {
  const std::string x = write("x.tensor", "3 3 2\n" + std::string("1 2 3 4 5 6\n7 8 9 1 2 3\n4 5 6 7 8 9\n"));
  const Outcome o = invoke({"decompose", "-i", x, "-b", "b1+b2:3", "-a", "ng", "--trace", "-o", (dir_ / "out").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(slurp(dir_ / "out" / "result.json"));
  EXPECT_TRUE(r["converged"].get<bool>());
  EXPECT_EQ(r["basis_size"].get<int>(), static_cast<int>(r["theta"].size()));
  EXPECT_TRUE(r.contains("manifest"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "q.tensor"));
  EXPECT_EQ(slurp(dir_ / "out" / "trace.csv").substr(0, 33), "iteration,kl,max_residual,wall_ti");

  const Outcome e = invoke({"eval", "-i", x, "-r", (dir_ / "out" / "q.tensor").string(), "--result",
                            (dir_ / "out" / "result.json").string()});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(e.out.substr(0, 22), "rmse,kl,params,time_ms");
}

TEST_F(CliTest, DecomposeSyntheticInput) {
  const Outcome o = invoke({"decompose", "-i", "synthetic:4x4x4", "--seed", "3", "-b", "b3:2", "-o", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir_ / "result.json"));
}

TEST_F(CliTest, ParseErrorsExitWithOne) {
  const std::string bad = write("bad.tensor", "2 2\n1 3 -2 2\n");
  const Outcome o = invoke({"decompose", "-i", bad, "-o", dir_.string()});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("line 2"), std::string::npos);
  EXPECT_EQ(invoke({"decompose"}).code, 1);
  EXPECT_EQ(invoke({"frobnicate"}).code, 1);
  EXPECT_EQ(invoke({"decompose", "-i", "missing.tensor", "-o", dir_.string()}).code, 1);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, NumericalErrorExitsWithTwo) {
  const Outcome o = invoke({"decompose", "-i", "synthetic:6x6", "-b", "full", "-a", "gd", "--lr", "1e6", "-o",
                            dir_.string()});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("learning rate"), std::string::npos);
}

TEST_F(CliTest, NotConvergedExitsWithThree) {
  const Outcome o = invoke({"decompose", "-i", "synthetic:6x6x6", "-b", "b2:3", "--tol", "1e-15", "--max-iter",
                            "1", "-o", dir_.string()});
  EXPECT_EQ(o.code, 3);
  const json r = json::parse(slurp(dir_ / "result.json"));
  EXPECT_FALSE(r["converged"].get<bool>());
}

TEST_F(CliTest, BasisListing) {
  const Outcome o = invoke({"basis", "-b", "b1", "--shape", "2x2x2"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, "1 1 2\n1 2 1\n2 1 1\n");
}

TEST_F(CliTest, EvalIdenticalFilesGivesZeroRmse) {
  const std::string x = write("x.tensor", "2 2\n1 3 2 2\n");
  const Outcome o = invoke({"eval", "-i", x, "-r", x});
  ASSERT_EQ(o.code, 0) << o.err;
  const std::string row = o.out.substr(o.out.find('\n') + 1);
  EXPECT_EQ(row.substr(0, 4), "0,0,");
}

TEST_F(CliTest, BoltzmannChainReportsFiveParameters) {
  const std::string g = write("chain.graph", "3\n1 2\n2 3\n");
  const std::string s = write("samples.txt", "0 0 1\n1 1 0\n0 1 1\n1 0 1\n0 0 0\n1 1 1\n0 1 0\n1 0 0\n1 1 0\n");
  const Outcome o = invoke({"boltzmann", "-g", g, "--samples", s});
  ASSERT_EQ(o.code, 0) << o.err;
  const json r = json::parse(o.out);
  EXPECT_EQ(r["parameter_count"].get<int>(), 5);
  EXPECT_EQ(r["biases"].size(), 3u);
  EXPECT_EQ(r["weights"].size(), 2u);
  EXPECT_TRUE(r["converged"].get<bool>());
}

TEST_F(CliTest, BenchWritesCsv) {
  const Outcome o = invoke({"bench", "--shapes", "4;3x3x2", "-b", "b1;b2:2", "--algorithms", "gd,ng", "-o",
                            dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream csv(slurp(dir_ / "bench.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("# manifest: ", 0), 0u);
  std::getline(csv, line);
  EXPECT_EQ(line, legendre::cli::bench_csv_header());
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 8);
}

TEST_F(CliTest, EmptyBenchSweepIsHeaderOnly) {
  const Outcome o = invoke({"bench", "-o", dir_.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  std::istringstream csv(slurp(dir_ / "bench.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  EXPECT_EQ(lines, 2);
}
