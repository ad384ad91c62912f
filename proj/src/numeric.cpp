#include "legendre/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "legendre/error.hpp"

namespace legendre::numeric {
namespace {

constexpr std::size_t kBlock = 16;

template <typename F>
double tree_sum(std::size_t begin, std::size_t end, const F& term) {
  if (end - begin <= kBlock) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  return tree_sum(begin, mid, term) + tree_sum(mid, end, term);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
  return tree_sum(0, xs.size(), [&](std::size_t i) { return xs[i]; });
}

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    if (!std::isfinite(x)) throw NumericalError("log-sum-exp: non-finite exponent");
    hi = std::max(hi, x);
  }
  const double s = tree_sum(0, xs.size(), [&](std::size_t i) { return std::exp(xs[i] - hi); });
  const double out = hi + std::log(s);
  if (!std::isfinite(out)) throw NumericalError("log-sum-exp overflow");
  return out;
}

}  // namespace legendre::numeric
