#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "legendre/poset.hpp"
#include "legendre/tensor.hpp"

namespace legendre {

// Natural parameters, one per basis member in canonical order.
struct ThetaVector {
  BasisPtr basis;
  Eigen::VectorXd values;

  static ThetaVector zeros(BasisPtr basis);
};

// Expectation parameters: eta_v = sum of probabilities over the up-set of v.
struct EtaVector {
  BasisPtr basis;
  Eigen::VectorXd values;
};

// Zeta transforms over the dense grid for one basis.
//
// Sum over a down-set of B is a prefix sum along every mode of a grid holding
// theta at the basis cells; sum over an up-set of Omega is a suffix sum along
// every mode of a grid holding q on Omega and 0 elsewhere. Both cost
// O(N * prod I_k). Up-sets intersect as up(u) & up(v) = up(u v v), so Fisher
// entries are single lookups in the suffix-summed grid.
class ZetaKernel {
 public:
  explicit ZetaKernel(BasisPtr basis);

  const Basis& basis() const noexcept { return *basis_; }
  const BasisPtr& basis_ptr() const noexcept { return basis_; }
  const SampleSpace& space() const noexcept { return *basis_->space(); }

  // out[i] = sum of theta_u over u in B with u <= (i-th member of Omega).
  void log_potentials(std::span<const double> theta, std::span<double> out) const;

  // grid[w] = sum of weights over Omega members >= w, for every grid cell w.
  void up_sums(std::span<const double> weights, std::vector<double>& grid) const;

  // Values of an up-sum grid at the basis cells.
  Eigen::VectorXd at_basis(const std::vector<double>& grid) const;

  // M(i, j) = grid at the join of basis members i and j.
  Eigen::MatrixXd at_joins(const std::vector<double>& grid) const;

 private:
  BasisPtr basis_;
};

using KernelPtr = std::shared_ptr<const ZetaKernel>;

// theta, psi, Q and eta kept mutually consistent: every change of theta
// refreshes the other three together.
class ModelState {
 public:
  explicit ModelState(KernelPtr kernel);  // theta = 0
  ModelState(KernelPtr kernel, Eigen::VectorXd theta);

  void set_theta(Eigen::VectorXd theta);

  const ZetaKernel& kernel() const noexcept { return *kernel_; }
  const ThetaVector& theta() const noexcept { return theta_; }
  double psi() const noexcept { return psi_; }
  const NormalizedTensor& q() const noexcept { return q_; }
  const EtaVector& eta() const noexcept { return eta_; }
  // Suffix-summed grid of q; shared with fisher_matrix.
  const std::vector<double>& up_grid() const noexcept { return up_grid_; }

 private:
  KernelPtr kernel_;
  ThetaVector theta_;
  double psi_ = 0.0;
  NormalizedTensor q_;
  EtaVector eta_;
  std::vector<double> up_grid_;
  std::vector<double> scratch_q_;
  std::vector<double> scratch_grid_;
};

// psi(theta) = log sum_{v in Omega} exp(sum_{u in B, u <= v} theta_u).
double compute_psi(const ThetaVector& theta);

// q_v = exp(sum_{u in B, u <= v} theta_u - psi). total_mass is 1.
NormalizedTensor reconstruct_q(const ThetaVector& theta);

EtaVector compute_eta(const NormalizedTensor& q, BasisPtr basis);
EtaVector compute_eta_hat(const NormalizedTensor& p, BasisPtr basis);

// sum over p_v > 0 of p_v log(p_v / q_v). Returns +inf when some q_v = 0
// where p_v > 0.
double kl_divergence(const NormalizedTensor& p, const NormalizedTensor& q);

// g_uv = sum_{w >= u, w >= v} q_w - eta_u eta_v, evaluated at the state's Q.
Eigen::MatrixXd fisher_matrix(const ModelState& state);

}  // namespace legendre
