#pragma once

// Brute-force reference computations straight from the definitions. They
// enumerate Omega and compare index vectors componentwise, sharing nothing
// with the grid kernels under test.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "legendre/model.hpp"

namespace oracle {

inline bool below(const legendre::IndexVector& u, const legendre::IndexVector& v) {
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u[k] > v[k]) return false;
  return true;
}

// log of the unnormalized product over the down-set, per member of Omega.
inline std::vector<double> log_products(const legendre::Basis& basis, const Eigen::VectorXd& theta) {
  const auto omega = basis.space()->members();
  std::vector<double> out(omega.size(), 0.0);
  for (std::size_t j = 0; j < omega.size(); ++j)
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (below(basis[i], omega[j])) out[j] += theta[static_cast<Eigen::Index>(i)];
  return out;
}

inline double psi(const legendre::Basis& basis, const Eigen::VectorXd& theta) {
  double s = 0.0;
  for (double lp : log_products(basis, theta)) s += std::exp(lp);
  return std::log(s);
}

inline std::vector<double> q(const legendre::Basis& basis, const Eigen::VectorXd& theta) {
  auto lp = log_products(basis, theta);
  const double z = psi(basis, theta);
  for (double& x : lp) x = std::exp(x - z);
  return lp;
}

inline Eigen::VectorXd eta(const legendre::Basis& basis, const std::vector<double>& dist) {
  const auto omega = basis.space()->members();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < omega.size(); ++j)
      if (below(basis[i], omega[j])) out[static_cast<Eigen::Index>(i)] += dist[j];
  return out;
}

inline Eigen::MatrixXd fisher(const legendre::Basis& basis, const std::vector<double>& dist) {
  const auto omega = basis.space()->members();
  const auto n = static_cast<Eigen::Index>(basis.size());
  const Eigen::VectorXd e = eta(basis, dist);
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      double s = 0.0;
      for (std::size_t j = 0; j < omega.size(); ++j)
        if (below(basis[static_cast<std::size_t>(a)], omega[j]) && below(basis[static_cast<std::size_t>(b)], omega[j]))
          s += dist[j];
      g(a, b) = s - e[a] * e[b];
    }
  return g;
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  return s;
}

// KL(P, Q(theta)) through the brute-force model.
inline double kl_at(const legendre::NormalizedTensor& p, const legendre::Basis& basis, const Eigen::VectorXd& theta) {
  return kl(p.probs, q(basis, theta));
}

// Random subset of Omega+ of the requested size (or smaller if Omega+ is).
inline std::vector<legendre::IndexVector> random_members(const legendre::SampleSpace& space, std::size_t count,
                                                         std::mt19937_64& rng) {
  std::vector<std::size_t> ords;
  for (std::size_t i = 1; i < space.size(); ++i) ords.push_back(i);
  std::shuffle(ords.begin(), ords.end(), rng);
  ords.resize(std::min(count, ords.size()));
  std::vector<legendre::IndexVector> out;
  for (auto o : ords) out.push_back(space.member(o));
  return out;
}

}  // namespace oracle
