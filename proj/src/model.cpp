#include "legendre/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "legendre/error.hpp"
#include "legendre/numeric.hpp"

namespace legendre {
namespace {

// In-place prefix sum along one mode of a row-major grid.
void prefix_along(std::vector<double>& a, std::size_t dim, std::size_t stride) {
  const std::size_t block = dim * stride;
  for (std::size_t base = 0; base < a.size(); base += block)
    for (std::size_t i = 1; i < dim; ++i) {
      double* dst = a.data() + base + i * stride;
      const double* src = dst - stride;
      for (std::size_t j = 0; j < stride; ++j) dst[j] += src[j];
    }
}

void suffix_along(std::vector<double>& a, std::size_t dim, std::size_t stride) {
  const std::size_t block = dim * stride;
  for (std::size_t base = 0; base < a.size(); base += block)
    for (std::size_t i = dim - 1; i-- > 0;) {
      double* dst = a.data() + base + i * stride;
      const double* src = dst + stride;
      for (std::size_t j = 0; j < stride; ++j) dst[j] += src[j];
    }
}

}  // namespace

ThetaVector ThetaVector::zeros(BasisPtr basis) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  return ThetaVector{std::move(basis), Eigen::VectorXd::Zero(n)};
}

// ---------------------------------------------------------------------------
// ZetaKernel

ZetaKernel::ZetaKernel(BasisPtr basis) : basis_(std::move(basis)) {}

void ZetaKernel::log_potentials(std::span<const double> theta, std::span<double> out) const {
  const SampleSpace& omega = space();
  const Shape& shape = omega.shape();
  if (theta.size() != basis_->size()) throw DomainError("theta length does not match the basis");
  if (out.size() != omega.size()) throw DomainError("output length does not match the sample space");
  if (basis_->empty()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::vector<double> grid(shape.cell_count(), 0.0);
  auto offs = basis_->offsets();
  for (std::size_t i = 0; i < theta.size(); ++i) grid[offs[i]] = theta[i];
  for (std::size_t k = 0; k < shape.order(); ++k)
    prefix_along(grid, static_cast<std::size_t>(shape.dim(k)), shape.stride(k));
  auto omega_offs = omega.offsets();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = grid[omega_offs[i]];
}

void ZetaKernel::up_sums(std::span<const double> weights, std::vector<double>& grid) const {
  const SampleSpace& omega = space();
  const Shape& shape = omega.shape();
  if (weights.size() != omega.size()) throw DomainError("weights length does not match the sample space");
  grid.assign(shape.cell_count(), 0.0);
  auto offs = omega.offsets();
  for (std::size_t i = 0; i < weights.size(); ++i) grid[offs[i]] = weights[i];
  for (std::size_t k = 0; k < shape.order(); ++k)
    suffix_along(grid, static_cast<std::size_t>(shape.dim(k)), shape.stride(k));
}

Eigen::VectorXd ZetaKernel::at_basis(const std::vector<double>& grid) const {
  auto offs = basis_->offsets();
  Eigen::VectorXd out(static_cast<Eigen::Index>(offs.size()));
  for (std::size_t i = 0; i < offs.size(); ++i) out[static_cast<Eigen::Index>(i)] = grid[offs[i]];
  return out;
}

Eigen::MatrixXd ZetaKernel::at_joins(const std::vector<double>& grid) const {
  const Shape& shape = space().shape();
  const std::size_t n = basis_->size();
  const std::size_t order = shape.order();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const IndexVector& u = (*basis_)[i];
    for (std::size_t j = i; j < n; ++j) {
      const IndexVector& v = (*basis_)[j];
      std::size_t off = 0;
      for (std::size_t k = 0; k < order; ++k)
        off += static_cast<std::size_t>(std::max(u[k], v[k]) - 1) * shape.stride(k);
      const double x = grid[off];
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x;
      m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = x;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// ModelState

ModelState::ModelState(KernelPtr kernel)
    : ModelState(kernel, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kernel->basis().size()))) {}

ModelState::ModelState(KernelPtr kernel, Eigen::VectorXd theta) : kernel_(std::move(kernel)) {
  theta_.basis = kernel_->basis_ptr();
  eta_.basis = kernel_->basis_ptr();
  q_.space = kernel_->basis().space();
  set_theta(std::move(theta));
}

void ModelState::set_theta(Eigen::VectorXd theta) {
  if (static_cast<std::size_t>(theta.size()) != kernel_->basis().size())
    throw DomainError("theta length does not match the basis");
  if (!theta.allFinite()) throw NumericalError("theta contains non-finite values");

  // Everything is computed into scratch buffers first; members change only
  // after every derived quantity is known to be finite.
  const std::size_t n = kernel_->space().size();
  std::vector<double>& q = scratch_q_;
  q.resize(n);
  kernel_->log_potentials({theta.data(), static_cast<std::size_t>(theta.size())}, q);
  double hi = -std::numeric_limits<double>::infinity();
  for (double s : q) hi = std::max(hi, s);
  if (!std::isfinite(hi)) throw NumericalError("log-potentials are not finite");
  for (double& s : q) s = std::exp(s - hi);
  const double total = numeric::pairwise_sum(q);
  const double psi = hi + std::log(total);
  if (!std::isfinite(psi)) throw NumericalError("log-partition overflow");
  for (double& s : q) s /= total;
  kernel_->up_sums(q, scratch_grid_);

  theta_.values = std::move(theta);
  psi_ = psi;
  std::swap(q_.probs, scratch_q_);
  std::swap(up_grid_, scratch_grid_);
  eta_.values = kernel_->at_basis(up_grid_);
}

// ---------------------------------------------------------------------------
// Free functions

double compute_psi(const ThetaVector& theta) {
  ZetaKernel kernel(theta.basis);
  std::vector<double> pot(kernel.space().size());
  kernel.log_potentials({theta.values.data(), static_cast<std::size_t>(theta.values.size())}, pot);
  return numeric::log_sum_exp(pot);
}

NormalizedTensor reconstruct_q(const ThetaVector& theta) {
  ModelState state(std::make_shared<const ZetaKernel>(theta.basis), theta.values);
  return state.q();
}

EtaVector compute_eta(const NormalizedTensor& q, BasisPtr basis) {
  if (!(*q.space == *basis->space())) throw DomainError("compute_eta: tensor and basis use different sample spaces");
  ZetaKernel kernel(basis);
  std::vector<double> grid;
  kernel.up_sums(q.probs, grid);
  return EtaVector{std::move(basis), kernel.at_basis(grid)};
}

EtaVector compute_eta_hat(const NormalizedTensor& p, BasisPtr basis) { return compute_eta(p, std::move(basis)); }

double kl_divergence(const NormalizedTensor& p, const NormalizedTensor& q) {
  if (!(*p.space == *q.space)) throw DomainError("kl_divergence: tensors use different sample spaces");
  std::vector<double> terms(p.probs.size(), 0.0);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double pv = p.probs[i];
    if (pv <= 0.0) continue;
    if (q.probs[i] <= 0.0) return std::numeric_limits<double>::infinity();
    terms[i] = pv * std::log(pv / q.probs[i]);
  }
  return std::max(0.0, numeric::pairwise_sum(terms));
}

Eigen::MatrixXd fisher_matrix(const ModelState& state) {
  const Eigen::VectorXd& eta = state.eta().values;
  Eigen::MatrixXd g = state.kernel().at_joins(state.up_grid());
  g.noalias() -= eta * eta.transpose();
  return g;
}

}  // namespace legendre
