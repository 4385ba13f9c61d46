#pragma once

#include <cstdint>

namespace deflab {

/// Exact binomial coefficient. Throws CapacityError instead of wrapping on overflow.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// log(n!) via lgamma.
double log_factorial(int n);

/// log binomial(n, k); -inf when k > n.
double log_binomial(int n, int k);

/// Falling factorial ratio n!/(n-k)! / n^k = prod_{j<k} (1 - j/n), computed by telescoping.
double falling_ratio(int n, int k);

} // namespace deflab
