#pragma once

#include <span>

namespace legendre::numeric {

// Pairwise (tree) summation. Result depends only on the input order.
double pairwise_sum(std::span<const double> xs);

// log(sum(exp(xs))) with max shift. Returns -inf for an empty span.
// Throws NumericalError on non-finite input.
double log_sum_exp(std::span<const double> xs);

}  // namespace legendre::numeric
