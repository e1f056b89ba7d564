#pragma once

// Slow, obviously-correct reference computations used as test oracles.

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

/// e_k / C(n,k) by enumerating all k-subsets.
inline double elem_sym_enum(std::span<const double> x, int k) {
    const int n = static_cast<int>(x.size());
    double sum = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double prod = 1.0;
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) prod *= x[static_cast<std::size_t>(i)];
        sum += prod;
    }
    return sum / binomial(n, k);
}

/// Central difference of f along d.
inline double directional_fd(const std::function<double(double)>& f, double eps) {
    return (f(eps) - f(-eps)) / (2.0 * eps);
}

inline std::vector<double> random_positive(std::mt19937_64& rng, int n, double lo = 0.05, double hi = 5.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& x : out) x = d(rng);
    return out;
}

template <int N>
Eigen::Matrix<double, N, N> random_spd(std::mt19937_64& rng, double shift = 0.1) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::Matrix<double, N, N> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m(i, j) = d(rng);
    return m * m.transpose() + shift * Eigen::Matrix<double, N, N>::Identity();
}

template <int N>
Eigen::Matrix<double, N, N> random_symmetric(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::Matrix<double, N, N> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) m(i, j) = d(rng);
    return 0.5 * (m + m.transpose());
}

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> d;
    Eigen::Vector3d v(d(rng), d(rng), d(rng));
    return v.normalized();
}

/// Least-squares slope of log(err) against log(h).
inline double convergence_order(const std::vector<double>& h, const std::vector<double>& err) {
    const std::size_t n = h.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(h[i]);
        my += std::log(err[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
        sxx += (std::log(h[i]) - mx) * (std::log(h[i]) - mx);
    }
    return sxy / sxx;
}

}  // namespace oracle
