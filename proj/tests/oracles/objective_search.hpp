#pragma once

#include <cmath>
#include <limits>

namespace oracle {

// f(P) = w_e P N(P) + w_t N(P), N(P) = bits / (theta + log2 P), written out
// independently of the library.
inline double objective(double power, double theta, double w_e, double w_t, double bits) {
    const double rate = theta + std::log2(power);
    if (!(rate > 0.0)) return std::numeric_limits<double>::infinity();
    return (w_e * power + w_t) * bits / rate;
}

struct SearchResult {
    double power;
    double value;
};

// Dense log-grid scan followed by golden-section refinement around the best
// grid point. The grid starts just above the feasibility edge 2^-theta.
inline SearchResult minimize_objective(double theta, double w_e, double w_t, double bits, int grid_points = 10000) {
    const double lo = std::log(std::exp2(-theta)) + 1e-9;
    const double hi = lo + 60.0;
    double best_u = lo;
    double best_f = std::numeric_limits<double>::infinity();
    const double step = (hi - lo) / (grid_points - 1);
    for (int i = 0; i < grid_points; ++i) {
        const double u = lo + step * i;
        const double f = objective(std::exp(u), theta, w_e, w_t, bits);
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    double a = std::max(lo, best_u - step);
    double b = best_u + step;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (objective(std::exp(c), theta, w_e, w_t, bits) < objective(std::exp(d), theta, w_e, w_t, bits)) b = d;
        else a = c;
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    const double u = 0.5 * (a + b);
    const double f = objective(std::exp(u), theta, w_e, w_t, bits);
    return f < best_f ? SearchResult{std::exp(u), f} : SearchResult{std::exp(best_u), best_f};
}

}  // namespace oracle
