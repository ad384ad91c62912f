#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "legendre/boltzmann.hpp"
#include "legendre/error.hpp"
#include "legendre/eval.hpp"
#include "legendre/optimizer.hpp"

namespace legendre::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kSyntheticPrefix = "synthetic:";

// Raised for a run that finished without meeting the tolerance.
struct NotConverged {
  long iterations;
};

struct SolverFlags {
  std::string algorithm = "ng";
  double learning_rate = 0.1;
  double tolerance = 1e-5;
  long max_iterations = 0;  // 0 = algorithm default
  double damping = 0.0;

  void attach(CLI::App* app) {
    app->add_option("-a,--algorithm", algorithm, "gd or ng")->check(CLI::IsMember({"gd", "ng"}));
    app->add_option("--lr", learning_rate, "gradient descent learning rate");
    app->add_option("--tol", tolerance, "convergence tolerance on max |eta - eta_hat|");
    app->add_option("--max-iter", max_iterations, "iteration limit (default 1e6 for gd, 100 for ng)");
    app->add_option("--damping", damping, "initial ridge added to the Fisher matrix (ng)");
  }

  SolverConfig config() const {
    SolverConfig c;
    c.algorithm = parse_algorithm(algorithm);
    c.learning_rate = learning_rate;
    c.tolerance = tolerance;
    if (max_iterations > 0) c.max_iterations = max_iterations;
    c.damping = damping;
    c.validate();
    return c;
  }

  void describe(json& m) const {
    m["algorithm"] = algorithm;
    m["learning_rate"] = learning_rate;
    m["tolerance"] = tolerance;
    m["max_iterations"] = config().iteration_limit();
    m["damping"] = damping;
  }
};

RawTensor read_input(const std::string& input, const std::string& format, std::uint64_t seed) {
  if (input.rfind(kSyntheticPrefix, 0) == 0)
    return synthetic_tensor(Shape::parse(input.substr(std::char_traits<char>::length(kSyntheticPrefix))), seed);
  return load_tensor_file(input, parse_tensor_format(format));
}

SpacePtr sample_space_for(const RawTensor& x, bool exclude_zeros) {
  if (exclude_zeros) return std::make_shared<const SampleSpace>(nonzero_sample_space(x));
  return std::make_shared<const SampleSpace>(x.shape());
}

json index_json(const IndexVector& v) { return json(v.components()); }

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double ms(std::chrono::duration<double> d) { return std::chrono::duration<double, std::milli>(d).count(); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'", 0);
  out << text;
}

fs::path prepare_output_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw ParseError("cannot create output directory '" + dir + "': " + ec.message(), 0);
  return p;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::ostringstream os;
  os.precision(17);
  os << "iteration,kl,max_residual,wall_time_ms\n";
  for (const auto& t : trace) os << t.iteration << ',' << t.kl << ',' << t.max_residual << ',' << t.wall_time_ms << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------
// decompose

struct DecomposeArgs {
  std::string input;
  std::string format = "dense";
  std::string basis = "b1";
  SolverFlags solver;
  bool exclude_zeros = false;
  std::uint64_t seed = 0;
  bool trace = false;
  std::string output_dir = ".";
};

int cmd_decompose(const DecomposeArgs& a, std::ostream& out) {
  SolverConfig cfg = a.solver.config();
  cfg.record_trace = a.trace;
  const RawTensor x = read_input(a.input, a.format, a.seed);
  auto space = sample_space_for(x, a.exclude_zeros);
  const NormalizedTensor p = normalize(x, space);
  auto basis = std::make_shared<const Basis>(parse_basis_spec(a.basis, space, &p));
  const DecompositionResult r = decompose(p, basis, cfg);

  const fs::path dir = prepare_output_dir(a.output_dir);
  json manifest;
  manifest["command"] = "decompose";
  manifest["input"] = a.input;
  manifest["format"] = a.format;
  manifest["basis"] = a.basis;
  a.solver.describe(manifest);
  manifest["seed"] = a.seed;
  manifest["exclude_zeros"] = a.exclude_zeros;
  manifest["output_dir"] = a.output_dir;
  json outputs = json::array({"result.json", "q.tensor"});
  if (a.trace) outputs.push_back("trace.csv");
  manifest["outputs"] = outputs;

  json res;
  res["manifest"] = manifest;
  res["shape"] = x.shape().dims();
  res["sample_space_size"] = space->size();
  res["basis_size"] = basis->size();
  json members = json::array();
  for (const auto& v : r.theta.basis->members()) members.push_back(index_json(v));
  res["basis"] = members;
  res["theta"] = vector_json(r.theta.values);
  res["eta"] = vector_json(r.eta.values);
  res["eta_hat"] = vector_json(r.eta_hat.values);
  json pruned = json::array();
  for (const auto& v : r.pruned) pruned.push_back(index_json(v));
  res["pruned"] = pruned;
  res["psi"] = r.psi;
  res["kl"] = r.kl;
  res["max_residual"] = r.max_residual;
  res["iterations"] = r.iterations;
  res["converged"] = r.converged;
  res["wall_time_ms"] = ms(r.wall_time);
  write_text(dir / "result.json", res.dump(2) + "\n");

  {
    std::ofstream qf(dir / "q.tensor");
    if (!qf) throw ParseError("cannot write q.tensor", 0);
    write_dense_text(qf, denormalize(r.q));
  }
  if (a.trace) write_text(dir / "trace.csv", trace_csv(r.trace));

  out << "|Omega|=" << space->size() << " |B|=" << basis->size() << " iterations=" << r.iterations
      << " kl=" << r.kl << " converged=" << (r.converged ? "true" : "false") << "\n";
  if (!r.converged) throw NotConverged{r.iterations};
  return kOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string shapes;
  std::string bases = "b3:5";
  std::string algorithms = "ng";
  SolverFlags solver;
  std::uint64_t seed = 0;
  int repeat = 1;
  std::string output_dir = ".";
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

int workers_from_env() {
  const char* v = std::getenv("THREADS");
  if (!v) return 1;
  const int n = std::atoi(v);
  return std::max(1, n);
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  BenchPlan plan;
  for (const auto& s : split(a.shapes, ';')) {
    if (s.find_first_of("x,") == std::string::npos) {
      const int d = std::stoi(s);
      plan.shapes.push_back(Shape{d, d, d});
    } else {
      plan.shapes.push_back(Shape::parse(s));
    }
  }
  plan.bases = split(a.bases, ';');
  for (const auto& name : split(a.algorithms, ',')) plan.algorithms.push_back(parse_algorithm(name));
  plan.solver = a.solver.config();
  plan.seed = a.seed;
  plan.repeat = std::max(1, a.repeat);
  plan.workers = workers_from_env();
  const auto rows = run_bench(plan);

  json manifest;
  manifest["command"] = "bench";
  manifest["shapes"] = a.shapes;
  manifest["bases"] = a.bases;
  manifest["algorithms"] = a.algorithms;
  a.solver.describe(manifest);
  manifest["seed"] = a.seed;
  manifest["repeat"] = plan.repeat;
  manifest["output_dir"] = a.output_dir;
  manifest["outputs"] = json::array({"bench.csv"});

  std::ostringstream csv;
  csv << "# manifest: " << manifest.dump() << "\n" << bench_csv_header() << "\n";
  for (const auto& r : rows) csv << bench_csv_row(r) << "\n";
  const fs::path dir = prepare_output_dir(a.output_dir);
  write_text(dir / "bench.csv", csv.str());
  out << rows.size() << " bench row(s) written to " << (dir / "bench.csv").string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string input;
  std::string reconstruction;
  std::string format = "dense";
  std::string recon_format = "dense";
  std::string result;
  std::uint64_t seed = 0;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RawTensor x = read_input(a.input, a.format, a.seed);
  const RawTensor xh = load_tensor_file(a.reconstruction, parse_tensor_format(a.recon_format));
  long params = 0;
  double time_ms = 0.0;
  if (!a.result.empty()) {
    std::ifstream in(a.result);
    if (!in) throw ParseError("cannot open '" + a.result + "'", 0);
    json r;
    try {
      r = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad result file: ") + e.what(), 0);
    }
    params = r.value("basis_size", 0L);
    time_ms = r.value("wall_time_ms", 0.0);
  }
  const EvalReport rep =
      evaluate(x, xh, params, std::chrono::duration<double>(time_ms / 1000.0));
  out << EvalReport::csv_header() << "\n" << rep.csv_row() << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// basis

struct BasisArgs {
  std::string basis = "b1";
  std::string shape;
  std::string input;
  std::string format = "dense";
  bool exclude_zeros = false;
  std::uint64_t seed = 0;
};

int cmd_basis(const BasisArgs& a, std::ostream& out) {
  SpacePtr space;
  std::optional<NormalizedTensor> p;
  if (!a.input.empty()) {
    const RawTensor x = read_input(a.input, a.format, a.seed);
    space = sample_space_for(x, a.exclude_zeros);
    p = normalize(x, space);
  } else if (!a.shape.empty()) {
    space = std::make_shared<const SampleSpace>(Shape::parse(a.shape));
  } else {
    throw DomainError("basis needs --shape or --input");
  }
  const Basis b = parse_basis_spec(a.basis, space, p ? &*p : nullptr);
  for (const auto& v : b.members()) {
    for (std::size_t k = 0; k < v.size(); ++k) out << (k ? " " : "") << v[k];
    out << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// boltzmann

struct BoltzmannArgs {
  std::string graph;
  std::string input;
  std::string format = "dense";
  std::string samples;
  SolverFlags solver;
  int max_variables = kDefaultMaxVariables;
  std::string output_dir;
};

int cmd_boltzmann(const BoltzmannArgs& a, std::ostream& out) {
  const BoltzmannGraph g = load_graph_file(a.graph);
  RawTensor counts;
  if (!a.samples.empty()) {
    std::ifstream in(a.samples);
    if (!in) throw ParseError("cannot open '" + a.samples + "'", 0);
    counts = empirical_from_samples(in, g.variables());
  } else if (!a.input.empty()) {
    counts = load_tensor_file(a.input, parse_tensor_format(a.format));
  } else {
    throw DomainError("boltzmann needs --input or --samples");
  }
  const NormalizedTensor p = normalize(counts, binary_space(g.variables()));
  const BoltzmannFit fit = fit_boltzmann(p, g, a.solver.config(), a.max_variables);

  json manifest;
  manifest["command"] = "boltzmann";
  manifest["graph"] = a.graph;
  manifest["input"] = a.samples.empty() ? a.input : a.samples;
  manifest["input_kind"] = a.samples.empty() ? "tensor" : "samples";
  a.solver.describe(manifest);
  manifest["max_variables"] = a.max_variables;
  manifest["output_dir"] = a.output_dir;

  json res;
  res["manifest"] = manifest;
  res["biases"] = fit.biases;
  json weights = json::array();
  for (const auto& w : fit.weights) weights.push_back({{"a", w.a}, {"b", w.b}, {"value", w.value}});
  res["weights"] = weights;
  res["log_partition"] = fit.log_partition;
  res["kl"] = fit.result.kl;
  res["iterations"] = fit.result.iterations;
  res["converged"] = fit.result.converged;
  res["parameter_count"] = fit.biases.size() + fit.weights.size();
  res["wall_time_ms"] = ms(fit.result.wall_time);
  const std::string text = res.dump(2) + "\n";
  if (a.output_dir.empty()) {
    out << text;
  } else {
    write_text(prepare_output_dir(a.output_dir) / "boltzmann.json", text);
  }
  if (!fit.result.converged) throw NotConverged{fit.result.iterations};
  return kOk;
}

}  // namespace

// ---------------------------------------------------------------------------
// bench machinery

std::vector<BenchRow> run_bench(const BenchPlan& plan) {
  struct Job {
    std::size_t shape, basis, algorithm;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < plan.shapes.size(); ++s)
    for (std::size_t b = 0; b < plan.bases.size(); ++b)
      for (std::size_t g = 0; g < plan.algorithms.size(); ++g) jobs.push_back({s, b, g});

  std::vector<BenchRow> rows(jobs.size());
  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    BenchRow& row = rows[j];
    const Shape& shape = plan.shapes[job.shape];
    row.shape = shape.to_string();
    row.cells = shape.cell_count();
    row.basis = plan.bases[job.basis];
    row.algorithm = to_string(plan.algorithms[job.algorithm]);
    try {
      const RawTensor x = synthetic_tensor(shape, plan.seed);
      const NormalizedTensor p = normalize(x);
      auto basis = std::make_shared<const Basis>(parse_basis_spec(row.basis, p.space, &p));
      row.basis_size = basis->size();
      SolverConfig cfg = plan.solver;
      cfg.algorithm = plan.algorithms[job.algorithm];
      cfg.record_trace = false;
      if (plan.algorithms[job.algorithm] != plan.solver.algorithm) cfg.max_iterations.reset();
      double best = std::numeric_limits<double>::infinity();
      for (int rep = 0; rep < plan.repeat; ++rep) {
        const DecompositionResult r = decompose(p, basis, cfg);
        best = std::min(best, ms(r.wall_time));
        row.iterations = r.iterations;
        row.converged = r.converged;
        row.kl = r.kl;
      }
      row.time_ms = best;
      row.time_per_iter_ms = best / static_cast<double>(std::max(1L, row.iterations));
      row.status = row.converged ? "ok" : "not_converged";
    } catch (const NumericalError& e) {
      row.status = std::string("numerical_error: ") + e.what();
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    std::replace(row.status.begin(), row.status.end(), ',', ';');
    std::replace(row.status.begin(), row.status.end(), '\n', ' ');
  };

  const int workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(jobs.size())));
  if (workers <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) run_job(j);
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

std::string bench_csv_header() {
  return "shape,cells,basis,basis_size,algorithm,iterations,converged,time_ms,time_per_iter_ms,kl,status";
}

std::string bench_csv_row(const BenchRow& r) {
  std::ostringstream os;
  os.precision(10);
  os << r.shape << ',' << r.cells << ',' << r.basis << ',' << r.basis_size << ',' << r.algorithm << ','
     << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << r.time_ms << ',' << r.time_per_iter_ms
     << ',' << r.kl << ',' << r.status;
  return os.str();
}

// ---------------------------------------------------------------------------
// entry point

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Legendre decomposition of nonnegative tensors"};
  app.require_subcommand(1);

  DecomposeArgs dec;
  auto* d = app.add_subcommand("decompose", "decompose a tensor and write result.json, q.tensor");
  d->add_option("-i,--input", dec.input, "tensor file, or synthetic:<shape>")->required();
  d->add_option("-f,--format", dec.format, "dense or coo");
  d->add_option("-b,--basis", dec.basis, "basis spec, e.g. b1+b2:3+b3:5 or file:<path>");
  dec.solver.attach(d);
  d->add_flag("--exclude-zeros", dec.exclude_zeros, "drop zero entries from the sample space");
  d->add_option("--seed", dec.seed, "seed for synthetic inputs");
  d->add_flag("--trace", dec.trace, "also write trace.csv");
  d->add_option("-o,--output-dir", dec.output_dir, "output directory");

  BenchArgs ben;
  auto* b = app.add_subcommand("bench", "sweep sizes, bases and algorithms on synthetic tensors");
  b->add_option("--shapes", ben.shapes, "';'-separated shapes, or cube edges (e.g. 20;40;80)");
  b->add_option("-b,--basis", ben.bases, "';'-separated basis specs");
  b->add_option("--algorithms", ben.algorithms, "comma-separated algorithms");
  ben.solver.attach(b);
  b->add_option("--seed", ben.seed, "PRNG seed for the synthetic tensors");
  b->add_option("--repeat", ben.repeat, "repeat each row and keep the fastest time");
  b->add_option("-o,--output-dir", ben.output_dir, "output directory");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "RMSE and KL between a tensor and its reconstruction");
  e->add_option("-i,--input", ev.input, "original tensor")->required();
  e->add_option("-r,--reconstruction", ev.reconstruction, "reconstructed tensor")->required();
  e->add_option("-f,--format", ev.format, "format of the original");
  e->add_option("--recon-format", ev.recon_format, "format of the reconstruction");
  e->add_option("--result", ev.result, "result.json to take params and time from");
  e->add_option("--seed", ev.seed, "seed for synthetic inputs");

  BasisArgs ba;
  auto* bs = app.add_subcommand("basis", "list the members of a basis");
  bs->add_option("-b,--basis", ba.basis, "basis spec");
  bs->add_option("--shape", ba.shape, "tensor shape, e.g. 2x2x2");
  bs->add_option("-i,--input", ba.input, "tensor file (needed for b3)");
  bs->add_option("-f,--format", ba.format, "dense or coo");
  bs->add_flag("--exclude-zeros", ba.exclude_zeros, "drop zero entries from the sample space");
  bs->add_option("--seed", ba.seed, "seed for synthetic inputs");

  BoltzmannArgs bm;
  auto* bz = app.add_subcommand("boltzmann", "fit a fully visible Boltzmann machine exactly");
  bz->add_option("-g,--graph", bm.graph, "graph file")->required();
  bz->add_option("-i,--input", bm.input, "empirical distribution over {1,2}^n as a tensor");
  bz->add_option("-f,--format", bm.format, "dense or coo");
  bz->add_option("--samples", bm.samples, "binary sample rows instead of a tensor");
  bm.solver.attach(bz);
  bz->add_option("--max-variables", bm.max_variables, "refuse graphs with more variables");
  bz->add_option("-o,--output-dir", bm.output_dir, "write boltzmann.json here instead of stdout");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (*d) return cmd_decompose(dec, out);
    if (*b) return cmd_bench(ben, out);
    if (*e) return cmd_eval(ev, out);
    if (*bs) return cmd_basis(ba, out);
    if (*bz) return cmd_boltzmann(bm, out);
  } catch (const NotConverged& nc) {
    err << "error: did not converge within " << nc.iterations << " iterations\n";
    return kNotConverged;
  } catch (const NumericalError& ex) {
    err << "numerical error: " << ex.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kParseError;
  }
  return kParseError;
}

}  // namespace legendre::cli
