#pragma once

// Independent helpers for oracles in tests. Nothing here calls the library's
// LP kernel.

#include <cmath>
#include <cstddef>
#include <optional>
#include <random>
#include <vector>

namespace drsoc::testing {

using Matrix = std::vector<std::vector<double>>;

/// Solves a square system by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_square(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        }
        if (std::abs(a[piv][c]) < 1e-12) return std::nullopt;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

/// Calls fn(indices) for every size-k subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

/**
 * Vertices of {x : G x <= h} (G is rows x n) by brute force over all n-subsets
 * of tight constraints. Only for tiny systems.
 */
inline std::vector<std::vector<double>> brute_vertices(const Matrix& g, const std::vector<double>& h,
                                                       double feas_tol = 1e-9) {
    std::vector<std::vector<double>> out;
    if (g.empty()) return out;
    const std::size_t n = g[0].size();
    for_each_subset(g.size(), n, [&](const std::vector<std::size_t>& tight) {
        Matrix a;
        std::vector<double> b;
        for (std::size_t r : tight) {
            a.push_back(g[r]);
            b.push_back(h[r]);
        }
        auto x = solve_square(a, b);
        if (!x) return;
        for (std::size_t r = 0; r < g.size(); ++r) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += g[r][j] * (*x)[j];
            if (s > h[r] + feas_tol) return;
        }
        for (const auto& v : out) {
            double d = 0.0;
            for (std::size_t j = 0; j < n; ++j) d = std::max(d, std::abs(v[j] - (*x)[j]));
            if (d < 1e-9) return;
        }
        out.push_back(*x);
    });
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t k) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(k);
    double s = 0.0;
    for (double& x : w) {
        x = e(rng);
        s += x;
    }
    for (double& x : w) x /= s;
    return w;
}

} // namespace drsoc::testing
