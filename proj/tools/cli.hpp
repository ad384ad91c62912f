#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "legendre/optimizer.hpp"

namespace legendre::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 1,
  kNumericalError = 2,
  kNotConverged = 3,
};

// Runs the command line `args` (args[0] is the program name). Diagnostics go
// to `err`; stdout-style output goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One bench sweep row.
struct BenchRow {
  std::string shape;
  std::size_t cells = 0;
  std::string basis;
  std::size_t basis_size = 0;
  std::string algorithm;
  long iterations = 0;
  bool converged = false;
  double time_ms = 0.0;
  double time_per_iter_ms = 0.0;
  double kl = 0.0;
  std::string status = "ok";
};

struct BenchPlan {
  std::vector<Shape> shapes;
  std::vector<std::string> bases;
  std::vector<Algorithm> algorithms;
  SolverConfig solver;  // algorithm field is overridden per row
  std::uint64_t seed = 0;
  int repeat = 1;       // time is the minimum over repeats
  int workers = 1;
};

std::vector<BenchRow> run_bench(const BenchPlan& plan);

std::string bench_csv_header();
std::string bench_csv_row(const BenchRow& row);

}  // namespace legendre::cli
