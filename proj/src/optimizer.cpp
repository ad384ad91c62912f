#include "legendre/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "legendre/error.hpp"
#include "legendre/numeric.hpp"

namespace legendre {

Algorithm parse_algorithm(const std::string& name) {
  if (name == "gd") return Algorithm::GradientDescent;
  if (name == "ng") return Algorithm::NaturalGradient;
  throw DomainError("unknown algorithm '" + name + "' (expected gd or ng)");
}

std::string to_string(Algorithm a) { return a == Algorithm::GradientDescent ? "gd" : "ng"; }

long SolverConfig::iteration_limit() const {
  if (max_iterations) return *max_iterations;
  return algorithm == Algorithm::GradientDescent ? 1'000'000 : 100;
}

void SolverConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning rate must be > 0");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw DomainError("tolerance must be > 0");
  if (max_iterations && *max_iterations < 1) throw DomainError("max iterations must be >= 1");
  if (!(damping >= 0.0) || !std::isfinite(damping)) throw DomainError("damping must be >= 0");
}

Eigen::VectorXd gradient(const EtaVector& eta, const EtaVector& eta_hat) {
  if (!eta.basis || !eta_hat.basis || !(*eta.basis == *eta_hat.basis) || eta.values.size() != eta_hat.values.size())
    throw DomainError("gradient: eta vectors are over different bases");
  return eta.values - eta_hat.values;
}

namespace {

using Clock = std::chrono::steady_clock;

// The fitted problem after removing basis members with zero empirical up-set
// mass, together with what is needed to map the answer back.
struct Problem {
  const NormalizedTensor* input = nullptr;
  NormalizedTensor p;
  KernelPtr kernel;
  EtaVector eta_hat;
  double neg_entropy = 0.0;  // sum p log p
  std::vector<IndexVector> pruned;

  // KL(P, Q(theta)) = sum p log p - theta . eta_hat + psi(theta)
  double kl(const ModelState& s) const {
    return neg_entropy - s.theta().values.dot(eta_hat.values) + s.psi();
  }
  double kl_noise(const ModelState& s) const {
    return 1e-13 * (1.0 + std::abs(s.psi()) + std::abs(s.theta().values.dot(eta_hat.values)) + std::abs(neg_entropy));
  }
};

Problem prepare(const NormalizedTensor& p, BasisPtr basis) {
  if (!p.space || !basis || !(*p.space == *basis->space()))
    throw DomainError("input tensor and basis use different sample spaces");
  Problem prob;
  prob.input = &p;
  EtaVector eta_hat = compute_eta_hat(p, basis);

  std::vector<IndexVector> keep;
  for (std::size_t i = 0; i < basis->size(); ++i) {
    if (eta_hat.values[static_cast<Eigen::Index>(i)] > 0.0)
      keep.push_back((*basis)[i]);
    else
      prob.pruned.push_back((*basis)[i]);
  }

  if (prob.pruned.empty()) {
    prob.p = p;
    prob.kernel = std::make_shared<const ZetaKernel>(basis);
    prob.eta_hat = std::move(eta_hat);
  } else {
    const SampleSpace& omega = *p.space;
    std::vector<std::size_t> offsets;
    std::vector<double> probs;
    for (std::size_t i = 0; i < omega.size(); ++i) {
      const IndexVector w = omega.member(i);
      const bool dead = std::any_of(prob.pruned.begin(), prob.pruned.end(),
                                    [&](const IndexVector& v) { return leq(v, w); });
      if (dead) continue;
      offsets.push_back(omega.offsets()[i]);
      probs.push_back(p.probs[i]);
    }
    auto space = std::make_shared<const SampleSpace>(omega.shape(), std::move(offsets));
    const double total = numeric::pairwise_sum(probs);
    for (double& x : probs) x /= total;
    prob.p = NormalizedTensor{space, std::move(probs), p.total_mass};
    auto fitted = std::make_shared<const Basis>(space, std::move(keep));
    prob.kernel = std::make_shared<const ZetaKernel>(fitted);
    prob.eta_hat = compute_eta_hat(prob.p, fitted);
    std::cerr << "warning: " << prob.pruned.size()
              << " basis member(s) have zero input mass on their up-set; fixing those cells to 0\n";
  }

  std::vector<double> terms(prob.p.probs.size(), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (prob.p.probs[i] > 0.0) terms[i] = prob.p.probs[i] * std::log(prob.p.probs[i]);
  prob.neg_entropy = numeric::pairwise_sum(terms);
  return prob;
}

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

DecompositionResult finish(const Problem& prob, const ModelState& state, long iterations, bool converged,
                           Clock::time_point start, std::vector<TraceRow> trace) {
  DecompositionResult r;
  const NormalizedTensor& in = *prob.input;
  r.q.space = in.space;
  r.q.total_mass = in.total_mass;
  if (prob.pruned.empty()) {
    r.q.probs = state.q().probs;
  } else {
    r.q.probs.assign(in.space->size(), 0.0);
    const SampleSpace& fitted = *prob.p.space;
    for (std::size_t i = 0; i < fitted.size(); ++i)
      r.q.probs[*in.space->ordinal_of_offset(fitted.offsets()[i])] = state.q().probs[i];
  }
  r.theta = state.theta();
  r.eta = state.eta();
  r.eta_hat = prob.eta_hat;
  r.psi = state.psi();
  r.kl = kl_divergence(in, r.q);
  r.max_residual = max_abs(gradient(state.eta(), prob.eta_hat));
  r.iterations = iterations;
  r.converged = converged;
  r.trace = std::move(trace);
  r.pruned = prob.pruned;
  r.wall_time = Clock::now() - start;
  return r;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Solves (G + lambda I) x = rhs, escalating lambda until the factorization is
// well conditioned. Cholesky first, pivoted LDL^T as fallback.
Eigen::VectorXd newton_direction(const Eigen::MatrixXd& g, const Eigen::VectorXd& rhs, double damping) {
  constexpr double kMinRcond = 1e-13;
  std::vector<double> ridge{damping};
  for (double lambda = 1e-10; lambda <= 1.0001e-2; lambda *= 100.0)
    if (lambda > damping) ridge.push_back(lambda);

  const auto n = g.rows();
  for (double lambda : ridge) {
    Eigen::MatrixXd a = g;
    a.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && llt.rcond() > kMinRcond) {
      Eigen::VectorXd x = llt.solve(rhs);
      if (x.allFinite()) return x;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > kMinRcond) {
      Eigen::VectorXd x = ldlt.solve(rhs);
      if (x.allFinite()) return x;
    }
  }
  throw NumericalError("Fisher matrix of size " + std::to_string(n) +
                       " is singular even with ridge damping 1e-2");
}

}  // namespace

DecompositionResult solve_gd(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::GradientDescent) throw DomainError("solve_gd called with a non-gd config");
  const auto start = Clock::now();
  const Problem prob = prepare(p, std::move(basis));
  ModelState state(prob.kernel);
  std::vector<TraceRow> trace;
  const long limit = cfg.iteration_limit();

  // A stable fixed step never raises KL above its starting value.
  const double kl_start = prob.kl(state);
  const double kl_slack = std::max(1e-9, 1e-6 * kl_start);
  long it = 0;
  bool converged = false;
  while (true) {
    const Eigen::VectorXd grad = gradient(state.eta(), prob.eta_hat);
    const double residual = max_abs(grad);
    const double kl_now = prob.kl(state);
    if (cfg.record_trace) trace.push_back({it, kl_now, residual, elapsed_ms(start)});
    if (!(kl_now <= kl_start + kl_slack))
      throw NumericalError("gradient descent diverged at iteration " + std::to_string(it) +
                           " (KL rose from " + std::to_string(kl_start) + " to " + std::to_string(kl_now) +
                           "); use a smaller learning rate");
    if (residual <= cfg.tolerance) {
      converged = true;
      break;
    }
    if (it == limit) break;
    Eigen::VectorXd next = state.theta().values - cfg.learning_rate * grad;
    try {
      state.set_theta(std::move(next));
    } catch (const NumericalError&) {
      throw NumericalError("gradient descent diverged at iteration " + std::to_string(it + 1) +
                           "; use a smaller learning rate");
    }
    ++it;
  }
  return finish(prob, state, it, converged, start, std::move(trace));
}

DecompositionResult solve_ng(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg) {
  cfg.validate();
  if (cfg.algorithm != Algorithm::NaturalGradient) throw DomainError("solve_ng called with a non-ng config");
  constexpr int kMaxHalvings = 20;
  const auto start = Clock::now();
  const Problem prob = prepare(p, std::move(basis));
  ModelState state(prob.kernel);
  std::vector<TraceRow> trace;
  const long limit = cfg.iteration_limit();

  long it = 0;
  bool converged = false;
  while (true) {
    const Eigen::VectorXd grad = gradient(state.eta(), prob.eta_hat);
    const double residual = max_abs(grad);
    const double kl_now = prob.kl(state);
    if (cfg.record_trace) trace.push_back({it, kl_now, residual, elapsed_ms(start)});
    if (residual <= cfg.tolerance) {
      converged = true;
      break;
    }
    if (it == limit) break;

    const Eigen::VectorXd step = newton_direction(fisher_matrix(state), grad, cfg.damping);
    const double allowed = kl_now + prob.kl_noise(state);
    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings && !accepted; ++h, scale *= 0.5) {
      try {
        ModelState trial(prob.kernel, state.theta().values - scale * step);
        if (prob.kl(trial) <= allowed) {
          state = std::move(trial);
          accepted = true;
        }
      } catch (const NumericalError&) {
        // overflow at this step length; halve and retry
      }
    }
    if (!accepted)
      throw NumericalError("natural gradient line search failed at iteration " + std::to_string(it + 1));
    ++it;
  }
  return finish(prob, state, it, converged, start, std::move(trace));
}

DecompositionResult decompose(const NormalizedTensor& p, BasisPtr basis, const SolverConfig& cfg) {
  return cfg.algorithm == Algorithm::GradientDescent ? solve_gd(p, std::move(basis), cfg)
                                                     : solve_ng(p, std::move(basis), cfg);
}

}  // namespace legendre
