#pragma once

// Independent reference computations used only by tests. None of these
// call into the library's allocation code paths.

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace defirisk::oracle {

/// f(w) for a diagonal matrix given its diagonal, straight from the
/// pairwise definition with c_i = w_i^2 d_i.
inline double diagonal_erc_objective(const std::vector<double>& w, const std::vector<double>& diag) {
    double f = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double d = w[i] * w[i] * diag[i] - w[j] * w[j] * diag[j];
            f += d * d;
        }
    }
    return f;
}

/// w_i proportional to 1/sqrt(d_i).
inline std::vector<double> inverse_sqrt_weights(const std::vector<double>& diag) {
    std::vector<double> w(diag.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) sum += (w[i] = 1.0 / std::sqrt(diag[i]));
    for (auto& v : w) v /= sum;
    return w;
}

/// Calls fn(point) for every point of the unit simplex in dimension n on a
/// grid of spacing 1/steps (n <= 3).
inline void for_each_simplex_grid_point(std::size_t n, int steps, const std::function<void(const std::vector<double>&)>& fn) {
    const double h = 1.0 / steps;
    if (n == 1) {
        fn({1.0});
    } else if (n == 2) {
        for (int i = 0; i <= steps; ++i) fn({i * h, (steps - i) * h});
    } else if (n == 3) {
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; i + j <= steps; ++j) fn({i * h, j * h, (steps - i - j) * h});
        }
    }
}

/// Nearest simplex grid point to v by exhaustive search (n <= 3).
inline std::vector<double> brute_force_projection(const std::vector<double>& v, int steps) {
    std::vector<double> best;
    double best_d = std::numeric_limits<double>::infinity();
    for_each_simplex_grid_point(v.size(), steps, [&](const std::vector<double>& p) {
        double d = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) d += (p[i] - v[i]) * (p[i] - v[i]);
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    });
    return best;
}

/// Central finite-difference gradient.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        x[i] = xi + h;
        const double fp = f(x);
        x[i] = xi - h;
        const double fm = f(x);
        x[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

}  // namespace defirisk::oracle
