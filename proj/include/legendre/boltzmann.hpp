#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "legendre/optimizer.hpp"

namespace legendre {

// Fully visible Boltzmann machine structure on variables 1..n.
class BoltzmannGraph {
 public:
  // Edges are stored as (a, b) with a < b, sorted and deduplicated.
  BoltzmannGraph(int n, std::vector<std::pair<int, int>> edges);

  int variables() const noexcept { return n_; }
  const std::vector<std::pair<int, int>>& edges() const noexcept { return edges_; }

 private:
  int n_;
  std::vector<std::pair<int, int>> edges_;
};

// First line n, then one "a b" edge per line (1-based), '#' comments.
BoltzmannGraph load_graph(std::istream& in);
BoltzmannGraph load_graph_file(const std::string& path);

// The binary grid {1,2}^n; state x maps to index x + (1,...,1).
SpacePtr binary_space(int n);

// B(V): a single 2 at position a per vertex. B(E): 2s at a and b per edge.
Basis basis_from_graph(const BoltzmannGraph& g, SpacePtr space);
Basis basis_from_graph(const BoltzmannGraph& g);

struct EdgeWeight {
  int a = 0;
  int b = 0;
  double value = 0.0;
};

struct BoltzmannFit {
  std::vector<double> biases;  // per vertex; -inf when the variable is never on
  std::vector<EdgeWeight> weights;
  double log_partition = 0.0;  // psi = log Z
  DecompositionResult result;
};

inline constexpr int kDefaultMaxVariables = 20;

BoltzmannFit fit_boltzmann(const NormalizedTensor& empirical, const BoltzmannGraph& g, const SolverConfig& cfg,
                           int max_variables = kDefaultMaxVariables);

// Counts of binary sample rows ("0 1 1 ...") as a 2 x ... x 2 tensor.
RawTensor empirical_from_samples(std::istream& in, int n);

}  // namespace legendre
