#pragma once

#include <cmath>
#include <vector>

#include "tunnelkit/random.hpp"
#include "tunnelkit/tree.hpp"

namespace testutil {

// Random feature matrix with columns on different scales.
inline tunnelkit::FeatureMatrix random_features(std::size_t n, std::uint64_t seed) {
    tunnelkit::Rng rng(seed);
    tunnelkit::FeatureMatrix x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x(i, 0) = rng.uniform(-1.0, 2.0);
        x(i, 1) = rng.uniform(50.0, 1000.0);
        x(i, 2) = rng.uniform(-20.0, 5.0);
        x(i, 3) = rng.uniform(0.0, 0.5);
    }
    return x;
}

// Smooth nonlinear target of all four features.
inline std::vector<double> smooth_target(const tunnelkit::FeatureMatrix& x) {
    std::vector<double> y(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        y[i] = 2.0 * x(i, 0) + 300.0 / x(i, 1) + 0.005 * x(i, 2) * x(i, 2) + std::sin(6.0 * x(i, 3));
    }
    return y;
}

// Dense Gaussian elimination with partial pivoting; a is n x n row-major.
inline std::vector<double> solve(std::vector<double> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r * n + c]) > std::abs(a[p * n + c])) p = r;
        }
        for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[p * n + k]);
        std::swap(b[c], b[p]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r * n + c] / a[c * n + c];
            for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    return x;
}

// Ordinary least squares with intercept via centered normal equations.
// Returns {intercept, w0..w3}.
inline std::vector<double> ols(const tunnelkit::FeatureMatrix& x, const std::vector<double>& y) {
    constexpr std::size_t p = tunnelkit::kNumFeatures;
    const double n = static_cast<double>(x.rows);
    std::vector<double> mx(p, 0.0);
    double my = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) mx[j] += x(i, j) / n;
        my += y[i] / n;
    }
    std::vector<double> a(p * p, 0.0), b(p, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            const double dj = x(i, j) - mx[j];
            b[j] += dj * (y[i] - my);
            for (std::size_t k = 0; k < p; ++k) a[j * p + k] += dj * (x(i, k) - mx[k]);
        }
    }
    const auto w = solve(a, b);
    std::vector<double> out{my};
    for (std::size_t j = 0; j < p; ++j) {
        out[0] -= w[j] * mx[j];
        out.push_back(w[j]);
    }
    return out;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace testutil
