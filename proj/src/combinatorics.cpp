#include "deflab/combinatorics.hpp"

#include "deflab/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace deflab {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    std::uint64_t result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        // result * (n - k + i) / i stays integral at every step
        const std::uint64_t factor = n - k + i;
        unsigned __int128 wide = static_cast<unsigned __int128>(result) * factor;
        wide /= i;
        if (wide > std::numeric_limits<std::uint64_t>::max()) {
            throw CapacityError("binomial(" + std::to_string(n) + ", " + std::to_string(k)
                                + ") overflows 64 bits");
        }
        result = static_cast<std::uint64_t>(wide);
    }
    return result;
}

double log_factorial(int n)
{
    if (n < 0) {
        throw DomainError("log_factorial: negative argument");
    }
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(int n, int k)
{
    if (k < 0 || k > n) {
        return -std::numeric_limits<double>::infinity();
    }
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double falling_ratio(int n, int k)
{
    double r = 1.0;
    for (int j = 0; j < k; ++j) {
        r *= 1.0 - static_cast<double>(j) / n;
    }
    return r;
}

} // namespace deflab
