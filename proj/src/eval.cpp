#include "legendre/eval.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "legendre/error.hpp"
#include "legendre/numeric.hpp"

namespace legendre {

std::string EvalReport::csv_header() { return "rmse,kl,params,time_ms"; }

std::string EvalReport::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << rmse << ',' << kl << ',' << parameter_count << ','
     << std::chrono::duration<double, std::milli>(wall_time).count();
  return os.str();
}

NormalizedTensor reference_projection(const NormalizedTensor& p, const Basis& basis, double tol, long max_sweeps) {
  const SampleSpace& omega = *p.space;
  if (!(omega == *basis.space())) throw DomainError("reference_projection: basis over a different sample space");
  if (omega.size() > kOracleMaxSpace || basis.size() > kOracleMaxBasis)
    throw DomainError("reference_projection is limited to |Omega| <= 10000 and |B| <= 64");
  if (!(tol > 0.0)) throw DomainError("reference_projection: tolerance must be > 0");

  const auto cells = omega.members();
  // up[i] lists the sample-space ordinals w with basis[i] <= w.
  std::vector<std::vector<std::size_t>> up(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const auto& v = basis[i].components();
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const auto& w = cells[j].components();
      bool above = true;
      for (std::size_t k = 0; k < v.size() && above; ++k) above = v[k] <= w[k];
      if (above) up[i].push_back(j);
    }
  }
  auto up_mass = [&](const std::vector<double>& dist, std::size_t i) {
    double s = 0.0;
    for (std::size_t j : up[i]) s += dist[j];
    return s;
  };

  std::vector<double> target(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) target[i] = up_mass(p.probs, i);

  std::vector<double> q(cells.size(), 1.0 / static_cast<double>(cells.size()));
  std::vector<char> inside(cells.size());
  for (long sweep = 0; sweep <= max_sweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) worst = std::max(worst, std::abs(up_mass(q, i) - target[i]));
    if (worst <= tol) return NormalizedTensor{p.space, std::move(q), p.total_mass};
    if (sweep == max_sweeps) break;

    for (std::size_t i = 0; i < basis.size(); ++i) {
      const double cur = up_mass(q, i);
      const double want = target[i];
      if (cur <= 0.0 && want > 0.0) throw OracleFailure("up-set of " + basis[i].to_string() + " lost all mass");
      if (cur >= 1.0 && want < 1.0)
        throw OracleFailure("complement of the up-set of " + basis[i].to_string() + " lost all mass");
      const double in_scale = cur > 0.0 ? want / cur : 1.0;
      const double out_scale = cur < 1.0 ? (1.0 - want) / (1.0 - cur) : 1.0;
      std::fill(inside.begin(), inside.end(), 0);
      for (std::size_t j : up[i]) inside[j] = 1;
      double total = 0.0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        q[j] *= inside[j] ? in_scale : out_scale;
        total += q[j];
      }
      for (double& x : q) x /= total;
    }
  }
  throw OracleFailure("iterative scaling did not reach tolerance within the sweep limit");
}

double rmse(const RawTensor& x, const RawTensor& x_hat) {
  if (!(x.shape() == x_hat.shape()))
    throw DomainError("rmse: shapes " + x.shape().to_string() + " and " + x_hat.shape().to_string() + " differ");
  auto a = x.values();
  auto b = x_hat.values();
  std::vector<double> sq(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) sq[i] = (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(numeric::pairwise_sum(sq) / static_cast<double>(sq.size()));
}

RawTensor synthetic_tensor(const Shape& shape, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> values(shape.cell_count());
  for (double& v : values) v = (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
  return RawTensor(shape, std::move(values));
}

EvalReport evaluate(const RawTensor& x, const RawTensor& x_hat, long parameter_count,
                    std::chrono::duration<double> wall_time) {
  EvalReport r;
  r.rmse = rmse(x, x_hat);
  r.parameter_count = parameter_count;
  r.wall_time = wall_time;
  const double sx = x.sum();
  const double sy = x_hat.sum();
  if (!(sx > 0.0) || !(sy > 0.0)) {
    r.kl = (sx > 0.0) ? std::numeric_limits<double>::infinity() : 0.0;
    return r;
  }
  auto a = x.values();
  auto b = x_hat.values();
  std::vector<double> terms(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double p = a[i] / sx;
    if (p <= 0.0) continue;
    const double q = b[i] / sy;
    if (q <= 0.0) {
      r.kl = std::numeric_limits<double>::infinity();
      return r;
    }
    terms[i] = p * std::log(p / q);
  }
  r.kl = std::max(0.0, numeric::pairwise_sum(terms));
  return r;
}

}  // namespace legendre
