#include "legendre/boltzmann.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

#include "legendre/error.hpp"

namespace legendre {

BoltzmannGraph::BoltzmannGraph(int n, std::vector<std::pair<int, int>> edges) : n_(n) {
  if (n < 1) throw DomainError("a Boltzmann machine needs at least one variable");
  for (auto [a, b] : edges) {
    if (a < 1 || a > n || b < 1 || b > n)
      throw DomainError("edge {" + std::to_string(a) + "," + std::to_string(b) + "} is out of range");
    if (a == b) throw DomainError("self-loop on variable " + std::to_string(a));
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
}

BoltzmannGraph load_graph(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  int n = -1;
  std::vector<std::pair<int, int>> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<long> xs;
    std::string tok;
    while (ss >> tok) {
      long x = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError("expected an integer, got '" + tok + "'", lineno);
      xs.push_back(x);
    }
    if (xs.empty()) continue;
    if (n < 0) {
      if (xs.size() != 1 || xs[0] < 1) throw ParseError("first line must hold the variable count", lineno);
      n = static_cast<int>(xs[0]);
      continue;
    }
    if (xs.size() != 2) throw ParseError("expected an edge 'a b'", lineno);
    if (xs[0] < 1 || xs[0] > n || xs[1] < 1 || xs[1] > n) throw ParseError("edge endpoint out of range", lineno);
    if (xs[0] == xs[1]) throw ParseError("self-loop", lineno);
    edges.emplace_back(static_cast<int>(xs[0]), static_cast<int>(xs[1]));
  }
  if (n < 0) throw ParseError("missing variable count", lineno == 0 ? 1 : lineno);
  return BoltzmannGraph(n, std::move(edges));
}

BoltzmannGraph load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file '" + path + "'", 0);
  return load_graph(in);
}

SpacePtr binary_space(int n) {
  if (n < 1) throw DomainError("binary space needs n >= 1");
  return std::make_shared<const SampleSpace>(Shape(std::vector<int>(static_cast<std::size_t>(n), 2)));
}

namespace {

IndexVector indicator(int n, std::initializer_list<int> on) {
  std::vector<int> c(static_cast<std::size_t>(n), 1);
  for (int a : on) c[static_cast<std::size_t>(a - 1)] = 2;
  return IndexVector(std::move(c));
}

}  // namespace

Basis basis_from_graph(const BoltzmannGraph& g, SpacePtr space) {
  const int n = g.variables();
  if (space->shape() != Shape(std::vector<int>(static_cast<std::size_t>(n), 2)))
    throw DomainError("Boltzmann sample space must be {1,2}^" + std::to_string(n));
  std::vector<IndexVector> members;
  for (int a = 1; a <= n; ++a) members.push_back(indicator(n, {a}));
  for (auto [a, b] : g.edges()) members.push_back(indicator(n, {a, b}));
  return Basis(std::move(space), std::move(members));
}

Basis basis_from_graph(const BoltzmannGraph& g) { return basis_from_graph(g, binary_space(g.variables())); }

BoltzmannFit fit_boltzmann(const NormalizedTensor& empirical, const BoltzmannGraph& g, const SolverConfig& cfg,
                           int max_variables) {
  const int n = g.variables();
  if (n > max_variables)
    throw DomainError("Boltzmann machine with " + std::to_string(n) + " variables exceeds the limit of " +
                      std::to_string(max_variables));
  auto basis = std::make_shared<const Basis>(basis_from_graph(g, empirical.space));

  BoltzmannFit fit;
  fit.result = decompose(empirical, basis, cfg);
  const Basis& fitted = *fit.result.theta.basis;
  auto theta_of = [&](const IndexVector& v) {
    if (auto i = fitted.ordinal(v)) return fit.result.theta.values[static_cast<Eigen::Index>(*i)];
    return -std::numeric_limits<double>::infinity();
  };
  for (int a = 1; a <= n; ++a) fit.biases.push_back(theta_of(indicator(n, {a})));
  for (auto [a, b] : g.edges()) fit.weights.push_back({a, b, theta_of(indicator(n, {a, b}))});
  fit.log_partition = fit.result.psi;
  return fit;
}

RawTensor empirical_from_samples(std::istream& in, int n) {
  Shape shape(std::vector<int>(static_cast<std::size_t>(n), 2));
  std::vector<double> counts(shape.cell_count(), 0.0);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::vector<int> bits;
    std::string tok;
    while (ss >> tok) {
      if (tok != "0" && tok != "1") throw ParseError("expected 0 or 1, got '" + tok + "'", lineno);
      bits.push_back(tok == "1");
    }
    if (bits.empty()) continue;
    if (bits.size() != static_cast<std::size_t>(n))
      throw ParseError("sample has " + std::to_string(bits.size()) + " values, expected " + std::to_string(n),
                       lineno);
    std::size_t off = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) off += static_cast<std::size_t>(bits[k]) * shape.stride(k);
    counts[off] += 1.0;
  }
  return RawTensor(std::move(shape), std::move(counts));
}

}  // namespace legendre
