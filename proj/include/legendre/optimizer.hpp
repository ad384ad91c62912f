#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "legendre/model.hpp"

namespace legendre {

enum class Algorithm { GradientDescent, NaturalGradient };

Algorithm parse_algorithm(const std::string& name);  // "gd" | "ng"
std::string to_string(Algorithm a);

struct SolverConfig {
  Algorithm algorithm = Algorithm::NaturalGradient;
  double learning_rate = 0.1;  // gd only
  double tolerance = 1e-5;     // on max |eta - eta_hat|
  std::optional<long> max_iterations;  // defaults: 1'000'000 for gd, 100 for ng
  double damping = 0.0;        // initial ridge for ng; escalated when G is ill-conditioned
  bool record_trace = false;

  long iteration_limit() const;
  void validate() const;  // throws DomainError
};

struct TraceRow {
  long iteration = 0;
  double kl = 0.0;
  double max_residual = 0.0;
  double wall_time_ms = 0.0;
};

struct DecompositionResult {
  // Reconstruction over the input's sample space, carrying the input's total mass.
  NormalizedTensor q;
  // Parameters over the basis actually fitted (see `pruned`).
  ThetaVector theta;
  EtaVector eta;
  EtaVector eta_hat;
  double psi = 0.0;
  double kl = 0.0;
  double max_residual = 0.0;
  long iterations = 0;
  std::chrono::duration<double> wall_time{0};
  bool converged = false;
  std::vector<TraceRow> trace;
  // Basis members whose up-set carries no input mass. Their optimum sits at
  // theta = -inf, so the up-set is fixed to zero and the member is removed.
  std::vector<IndexVector> pruned;
};

// d KL / d theta_w = eta_w - eta_hat_w.
Eigen::VectorXd gradient(const EtaVector& eta, const EtaVector& eta_hat);

DecompositionResult solve_gd(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg);
DecompositionResult solve_ng(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg);

// Dispatches on cfg.algorithm.
DecompositionResult decompose(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg);

}  // namespace legendre
