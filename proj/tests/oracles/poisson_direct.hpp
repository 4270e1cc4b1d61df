#pragma once

#include <cmath>
#include <cstddef>

namespace oracle {

// Cumulative Poisson mass by the p_n = p_{n-1} mu / n recurrence.
inline long double poisson_cdf(std::size_t n, long double mu) {
    long double p = std::exp(-mu);
    long double sum = p;
    for (std::size_t k = 1; k <= n; ++k) {
        p *= mu / static_cast<long double>(k);
        sum += p;
    }
    return sum;
}

inline std::size_t horizon_by_scan(long double mu, long double tolerance) {
    std::size_t n = 0;
    while (1.0L - poisson_cdf(n, mu) > tolerance) ++n;
    return n;
}

}  // namespace oracle
