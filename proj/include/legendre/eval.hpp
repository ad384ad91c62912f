#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "legendre/error.hpp"
#include "legendre/poset.hpp"
#include "legendre/tensor.hpp"

namespace legendre {

struct EvalReport {
  double rmse = 0.0;
  double kl = 0.0;
  long parameter_count = 0;
  std::chrono::duration<double> wall_time{0};

  static std::string csv_header();  // "rmse,kl,params,time_ms"
  std::string csv_row() const;
};

// Thrown by reference_projection when a constraint cannot be met.
class OracleFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr std::size_t kOracleMaxSpace = 10'000;
inline constexpr std::size_t kOracleMaxBasis = 64;

// Iterative proportional scaling onto eta = eta_hat, starting from the
// uniform distribution. Each step rescales the up-set of one basis member
// and its complement so that member's constraint holds exactly.
// Deliberately independent of the optimizer kernels.
NormalizedTensor reference_projection(const NormalizedTensor& p, const Basis& basis, double tol,
                                      long max_sweeps = 1'000'000);

// Root mean squared difference over every grid cell.
double rmse(const RawTensor& x, const RawTensor& x_hat);

// i.i.d. Uniform(0,1) entries. Raw draws come from std::mt19937_64 seeded
// with `seed`; each draw d becomes ((d >> 11) + 0.5) * 2^-53, so values lie
// strictly inside (0, 1) and the sequence is reproducible anywhere.
RawTensor synthetic_tensor(const Shape& shape, std::uint64_t seed);

// rmse between the tensors, KL between their full-grid normalizations.
EvalReport evaluate(const RawTensor& x, const RawTensor& x_hat, long parameter_count = 0,
                    std::chrono::duration<double> wall_time = {});

}  // namespace legendre
