#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace tunnelkit::numeric {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow; -inf acts as the additive identity.
inline double log_add(double a, double b) noexcept {
    if (a == neg_inf) return b;
    if (b == neg_inf) return a;
    const double hi = a > b ? a : b;
    const double lo = a > b ? b : a;
    return hi + std::log1p(std::exp(lo - hi));
}

double log_sum_exp(std::span<const double> values) noexcept;

// log(1 + exp(x))
inline double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double log_cosh(double x) noexcept {
    const double a = std::fabs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// Requires x > 0.
inline double log_sinh(double x) noexcept {
    if (x < 1e-4) {
        return std::log(x) + x * x / 6.0;
    }
    return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Nodes from Newton iteration on P_n; cached per order.
const GaussRule& gauss_legendre(int order);

struct AdaptiveOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_depth = 50;
    int order = 10;
};

struct IntegrationResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = true;
};

// Adaptive bisection Gauss-Legendre: a panel is accepted when the rule on the
// panel agrees with the sum over its two halves.
IntegrationResult integrate(const std::function<double(double)>& f, double a, double b,
                            const AdaptiveOptions& options = {});

}  // namespace tunnelkit::numeric
