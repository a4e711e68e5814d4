#include "tunnelkit/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "tunnelkit/constants.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/numeric.hpp"

namespace tunnelkit {

namespace {

constexpr double pi = std::numbers::pi;

Transmission closed_channel() { return {0.0, numeric::neg_inf}; }
Transmission open_channel() { return {1.0, 0.0}; }

Transmission from_log(double log_p) {
    if (log_p > 0.0) log_p = 0.0;
    return {std::exp(log_p), log_p};
}

// xi = 1 / (1 + exp(-t)) and 1 - xi, without cancellation.
struct Logistic {
    double xi;
    double one_minus_xi;
};

Logistic logistic(double t) {
    if (t >= 0.0) {
        const double e = std::exp(-t);
        return {1.0 / (1.0 + e), e / (1.0 + e)};
    }
    const double e = std::exp(t);
    return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

double eckart_potential(const EckartGeometry& g, double x) {
    const auto [xi, rest] = logistic(x / g.length);
    return g.drop * xi + g.coupling * xi * rest;
}

double eckart_slope(const EckartGeometry& g, double x) {
    const auto [xi, rest] = logistic(x / g.length);
    return (g.drop + g.coupling * (1.0 - 2.0 * xi)) * xi * rest / g.length;
}

// Root of V(x) = E on the monotone branch between `inner` (V > E) and some
// point `outer` reached by doubling steps away from the maximum.
double eckart_root(const EckartGeometry& g, double energy, double inner, double direction) {
    double step = g.length;
    double outer = inner + direction * step;
    int expansions = 0;
    while (eckart_potential(g, outer) > energy) {
        step *= 2.0;
        outer = inner + direction * step;
        if (++expansions > 200) {
            fail(ErrorKind::Numerical, "turning point bracket expansion failed");
        }
    }
    // lo has V > E (inside the barrier), hi has V <= E
    double in = inner;
    double out = outer;
    int iterations = 0;
    const double scale = g.length;
    while (std::fabs(out - in) > 1e-12 * std::max(std::fabs(in), scale)) {
        const double mid = 0.5 * (in + out);
        if (eckart_potential(g, mid) > energy) {
            in = mid;
        } else {
            out = mid;
        }
        if (++iterations >= 200) break;
    }
    double x = 0.5 * (in + out);
    // Newton polish, kept only while it stays in the bracket
    for (int k = 0; k < 3 && iterations < 200; ++k, ++iterations) {
        const double slope = eckart_slope(g, x);
        if (slope == 0.0) break;
        const double next = x - (eckart_potential(g, x) - energy) / slope;
        if (!(next >= std::min(in, out) && next <= std::max(in, out))) break;
        if (std::fabs(next - x) <= 1e-15 * std::max(std::fabs(x), scale)) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

// Potential with the shape-dependent geometry resolved once.
struct PotentialEvaluator {
    const BarrierSpec& spec;
    EckartGeometry geometry{};
    double parabola_k = 0.0;

    explicit PotentialEvaluator(const BarrierSpec& s) : spec(s) {
        if (s.shape == BarrierShape::Eckart) geometry = eckart_geometry(s);
        parabola_k = s.reference_mass * s.omega_imag * s.omega_imag;
    }

    double operator()(double x) const {
        switch (spec.shape) {
            case BarrierShape::Eckart:
                return eckart_potential(geometry, x);
            case BarrierShape::Parabolic: {
                const double v = spec.v_forward - 0.5 * parabola_k * x * x;
                return v > 0.0 ? v : 0.0;
            }
            case BarrierShape::Rectangular:
                return (x >= 0.0 && x <= spec.width) ? spec.v_forward : 0.0;
        }
        return 0.0;
    }
};

}  // namespace

std::string_view to_string(BarrierShape shape) noexcept {
    switch (shape) {
        case BarrierShape::Eckart: return "eckart";
        case BarrierShape::Parabolic: return "parabolic";
        case BarrierShape::Rectangular: return "rectangular";
    }
    return "eckart";
}

BarrierShape barrier_shape_from_string(std::string_view name) {
    if (name == "eckart") return BarrierShape::Eckart;
    if (name == "parabolic") return BarrierShape::Parabolic;
    if (name == "rectangular") return BarrierShape::Rectangular;
    fail(ErrorKind::Specification, "unknown barrier shape '" + std::string(name) + "'");
}

std::string_view to_string(TransmissionMode mode) noexcept {
    return mode == TransmissionMode::Wkb ? "wkb" : "exact";
}

TransmissionMode transmission_mode_from_string(std::string_view name) {
    if (name == "wkb") return TransmissionMode::Wkb;
    if (name == "exact") return TransmissionMode::Exact;
    fail(ErrorKind::Specification, "unknown transmission mode '" + std::string(name) + "'");
}

BarrierSpec make_eckart(double v_forward_kjmol, double v_reverse_kjmol, double omega_cm1,
                        double reference_mass_amu) {
    BarrierSpec spec;
    spec.shape = BarrierShape::Eckart;
    spec.v_forward = v_forward_kjmol * constants::kJmol_to_J;
    spec.v_reverse = v_reverse_kjmol * constants::kJmol_to_J;
    spec.omega_imag = omega_cm1 * constants::cm1_to_radps;
    spec.reference_mass = reference_mass_amu * constants::amu;
    validate(spec);
    return spec;
}

BarrierSpec make_parabolic(double v_forward_kjmol, double omega_cm1, double reference_mass_amu) {
    BarrierSpec spec;
    spec.shape = BarrierShape::Parabolic;
    spec.v_forward = v_forward_kjmol * constants::kJmol_to_J;
    spec.v_reverse = spec.v_forward;
    spec.omega_imag = omega_cm1 * constants::cm1_to_radps;
    spec.reference_mass = reference_mass_amu * constants::amu;
    validate(spec);
    return spec;
}

BarrierSpec make_rectangular(double height_kjmol, double width_angstrom) {
    BarrierSpec spec;
    spec.shape = BarrierShape::Rectangular;
    spec.v_forward = height_kjmol * constants::kJmol_to_J;
    spec.v_reverse = spec.v_forward;
    spec.width = width_angstrom * constants::angstrom;
    validate(spec);
    return spec;
}

void validate(const BarrierSpec& spec) {
    auto finite = [](double v) { return std::isfinite(v); };
    require(finite(spec.v_forward) && spec.v_forward > 0.0, ErrorKind::Specification,
            "barrier v_forward must be positive");
    require(finite(spec.v_reverse) && spec.v_reverse > 0.0 && spec.v_reverse <= spec.v_forward,
            ErrorKind::Specification, "barrier v_reverse must satisfy 0 < v_reverse <= v_forward");
    switch (spec.shape) {
        case BarrierShape::Eckart:
        case BarrierShape::Parabolic:
            require(finite(spec.omega_imag) && spec.omega_imag > 0.0, ErrorKind::Specification,
                    "barrier omega_imag must be positive");
            require(finite(spec.reference_mass) && spec.reference_mass > 0.0,
                    ErrorKind::Specification, "barrier reference_mass must be positive");
            break;
        case BarrierShape::Rectangular:
            require(finite(spec.width) && spec.width > 0.0, ErrorKind::Specification,
                    "rectangular barrier width must be positive");
            break;
    }
}

EckartGeometry eckart_geometry(const BarrierSpec& spec) {
    EckartGeometry g;
    g.drop = spec.v_forward - spec.v_reverse;
    const double s = std::sqrt(spec.v_forward) + std::sqrt(spec.v_reverse);
    g.coupling = s * s;
    // V(xi) = (A + B) xi - B xi^2 peaks at xi* = (A + B) / 2B; with
    // dxi/dx = xi (1 - xi) / L the curvature there is -2B (xi*(1-xi*))^2 / L^2.
    const double xi_star = (g.drop + g.coupling) / (2.0 * g.coupling);
    const double spread = xi_star * (1.0 - xi_star);
    g.length = std::sqrt(2.0 * g.coupling / spec.reference_mass) / spec.omega_imag * spread;
    g.x_max = g.length * std::log(xi_star / (1.0 - xi_star));
    return g;
}

double potential(const BarrierSpec& spec, double x) {
    validate(spec);
    return PotentialEvaluator(spec)(x);
}

double barrier_top_position(const BarrierSpec& spec) {
    switch (spec.shape) {
        case BarrierShape::Eckart: return eckart_geometry(spec).x_max;
        case BarrierShape::Parabolic: return 0.0;
        case BarrierShape::Rectangular: return 0.5 * spec.width;
    }
    return 0.0;
}

double lower_turning_energy(const BarrierSpec& spec) {
    return spec.shape == BarrierShape::Eckart ? spec.v_forward - spec.v_reverse : 0.0;
}

TurningPoints turning_points(const BarrierSpec& spec, double energy) {
    validate(spec);
    const double lower = lower_turning_energy(spec);
    if (!(energy > lower && energy < spec.v_forward) || !(energy > 0.0)) {
        fail(ErrorKind::Domain, "energy outside the two-turning-point window");
    }
    switch (spec.shape) {
        case BarrierShape::Eckart: {
            const EckartGeometry g = eckart_geometry(spec);
            return {eckart_root(g, energy, g.x_max, -1.0), eckart_root(g, energy, g.x_max, +1.0)};
        }
        case BarrierShape::Parabolic: {
            const double k = spec.reference_mass * spec.omega_imag * spec.omega_imag;
            const double d = std::sqrt(2.0 * (spec.v_forward - energy) / k);
            return {-d, d};
        }
        case BarrierShape::Rectangular:
            return {0.0, spec.width};
    }
    return {};
}

double barrier_action(const BarrierSpec& spec, double mass, double energy, double rel_tol) {
    // Near the top the turning points merge and V - E drowns in rounding; the
    // action there is that of the osculating parabola, exact to O((V - E) / V).
    if (spec.shape != BarrierShape::Rectangular && spec.v_forward - energy < 1e-6 * spec.v_forward) {
        return pi * (spec.v_forward - energy) * std::sqrt(mass / spec.reference_mass) / spec.omega_imag;
    }
    const TurningPoints tp = turning_points(spec, energy);
    const double mid = 0.5 * (tp.x1 + tp.x2);
    const double half = 0.5 * (tp.x2 - tp.x1);
    const double two_m = 2.0 * mass;
    const PotentialEvaluator v(spec);
    // x = mid - half cos(theta) removes the square-root endpoint behaviour
    auto integrand = [&](double theta) {
        double x = mid - half * std::cos(theta);
        if (spec.shape == BarrierShape::Rectangular) {
            x = std::clamp(x, 0.0, spec.width);
        }
        const double gap = v(x) - energy;
        return gap > 0.0 ? std::sqrt(two_m * gap) * half * std::sin(theta) : 0.0;
    };
    numeric::AdaptiveOptions options;
    options.rel_tol = rel_tol;
    options.order = 10;
    options.max_depth = 40;
    const auto result = numeric::integrate(integrand, 0.0, pi, options);
    if (!result.converged) {
        fail(ErrorKind::Numerical, "action integral did not converge");
    }
    return result.value;
}

Transmission transmission_wkb(const BarrierSpec& spec, double mass, double energy) {
    validate(spec);
    require(mass > 0.0, ErrorKind::Domain, "mass must be positive");
    require(energy >= 0.0, ErrorKind::Domain, "energy must be non-negative");
    if (energy >= spec.v_forward) return open_channel();
    if (energy <= lower_turning_energy(spec) || energy <= 0.0) return closed_channel();
    const double action = barrier_action(spec, mass, energy);
    return from_log(-2.0 * action / constants::hbar);
}

Transmission transmission_exact(const BarrierSpec& spec, double mass, double energy) {
    validate(spec);
    require(mass > 0.0, ErrorKind::Domain, "mass must be positive");
    require(energy >= 0.0, ErrorKind::Domain, "energy must be non-negative");
    constexpr double hbar = constants::hbar;
    switch (spec.shape) {
        case BarrierShape::Parabolic: {
            // barrier frequency seen by this mass
            const double omega = spec.omega_imag * std::sqrt(spec.reference_mass / mass);
            const double z = 2.0 * pi * (spec.v_forward - energy) / (hbar * omega);
            return from_log(-numeric::softplus(z));
        }
        case BarrierShape::Eckart: {
            const EckartGeometry g = eckart_geometry(spec);
            if (energy <= g.drop || energy <= 0.0) return closed_channel();
            const double a1 = 2.0 * pi * g.length * std::sqrt(2.0 * mass * energy) / hbar;
            const double a2 = 2.0 * pi * g.length * std::sqrt(2.0 * mass * (energy - g.drop)) / hbar;
            const double q = 2.0 * mass * g.coupling * g.length * g.length / (hbar * hbar) - 0.25;
            double log_den;
            if (q >= 0.0) {
                log_den = numeric::log_add(numeric::log_cosh(a1 + a2),
                                           numeric::log_cosh(2.0 * pi * std::sqrt(q)));
            } else {
                const double c = std::cos(2.0 * pi * std::sqrt(-q));
                const double lc = numeric::log_cosh(a1 + a2);
                log_den = lc + std::log1p(c * std::exp(-lc));
            }
            const double log_p = std::numbers::ln2 + numeric::log_sinh(a1) + numeric::log_sinh(a2) - log_den;
            return from_log(log_p);
        }
        case BarrierShape::Rectangular: {
            if (energy <= 0.0) return closed_channel();
            const double v = spec.v_forward;
            const double len = spec.width;
            double log_r;
            if (energy < v) {
                const double q = std::sqrt(2.0 * mass * (v - energy)) / hbar;
                log_r = 2.0 * std::log(v) - std::log(4.0 * energy * (v - energy)) +
                        2.0 * numeric::log_sinh(q * len);
            } else if (energy > v) {
                const double k = std::sqrt(2.0 * mass * (energy - v)) / hbar;
                const double s = std::sin(k * len);
                if (s == 0.0) return open_channel();
                log_r = 2.0 * std::log(v) - std::log(4.0 * energy * (energy - v)) + 2.0 * std::log(std::fabs(s));
            } else {
                log_r = std::log(mass * v * len * len / (2.0 * hbar * hbar));
            }
            return from_log(-numeric::softplus(log_r));
        }
    }
    fail(ErrorKind::Capability, "unsupported barrier shape for exact transmission");
}

Transmission transmission(TransmissionMode mode, const BarrierSpec& spec, double mass, double energy) {
    return mode == TransmissionMode::Wkb ? transmission_wkb(spec, mass, energy)
                                         : transmission_exact(spec, mass, energy);
}

}  // namespace tunnelkit
