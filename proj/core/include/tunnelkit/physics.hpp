#pragma once

#include <string_view>

namespace tunnelkit {

enum class BarrierShape { Eckart, Parabolic, Rectangular };

std::string_view to_string(BarrierShape shape) noexcept;
BarrierShape barrier_shape_from_string(std::string_view name);

// One-dimensional barrier in SI per-molecule units.
//
// The reactant channel sits at V = 0. For Eckart the product channel sits at
// v_forward - v_reverse and the maximum is v_forward; the width is fixed by
// requiring V''(x_max) = -reference_mass * omega_imag^2, so isotopologues
// sharing a spec share one geometric barrier. The parabolic barrier is
// v_forward - m_ref w^2 (x - x0)^2 / 2 clamped at zero, with x0 = 0. The
// rectangular barrier is v_forward on [0, width].
struct BarrierSpec {
    BarrierShape shape = BarrierShape::Eckart;
    double v_forward = 0.0;       // J
    double v_reverse = 0.0;       // J
    double omega_imag = 0.0;      // rad/s, Eckart and Parabolic
    double width = 0.0;           // m, Rectangular
    double reference_mass = 0.0;  // kg, Eckart and Parabolic

    // (v_forward - v_reverse) / v_forward
    double asymmetry() const noexcept { return (v_forward - v_reverse) / v_forward; }
};

// Convenience constructors taking external units (kJ/mol, cm^-1, amu, angstrom).
BarrierSpec make_eckart(double v_forward_kjmol, double v_reverse_kjmol, double omega_cm1,
                        double reference_mass_amu);
BarrierSpec make_parabolic(double v_forward_kjmol, double omega_cm1, double reference_mass_amu);
BarrierSpec make_rectangular(double height_kjmol, double width_angstrom);

// Throws Specification on violated invariants.
void validate(const BarrierSpec& spec);

// Eckart geometry derived from the spec.
struct EckartGeometry {
    double drop = 0.0;       // A: product asymptote, v_forward - v_reverse
    double coupling = 0.0;   // B: (sqrt(v_forward) + sqrt(v_reverse))^2
    double length = 0.0;     // L in y = exp(x / L)
    double x_max = 0.0;      // position of the maximum
};
EckartGeometry eckart_geometry(const BarrierSpec& spec);

double potential(const BarrierSpec& spec, double x);

// Position of the barrier maximum (midpoint for Rectangular).
double barrier_top_position(const BarrierSpec& spec);

// Lowest energy with two classical turning points: the higher asymptote.
double lower_turning_energy(const BarrierSpec& spec);

struct TurningPoints {
    double x1 = 0.0;
    double x2 = 0.0;
    double width() const noexcept { return x2 - x1; }
};

// Requires lower_turning_energy(spec) < energy < v_forward; throws Domain
// otherwise. Eckart roots come from bracketed bisection refined by Newton.
TurningPoints turning_points(const BarrierSpec& spec, double energy);

struct Transmission {
    double probability = 0.0;
    double log_probability = 0.0;  // natural log; -inf when the channel is closed
};

// Semiclassical exp(-2 S / hbar), S = integral of sqrt(2 m (V - E)) between
// the turning points; clamped to 1 at and above the barrier top.
Transmission transmission_wkb(const BarrierSpec& spec, double mass, double energy);

// The action integral S itself (J s) by adaptive Gauss-Legendre quadrature.
double barrier_action(const BarrierSpec& spec, double mass, double energy, double rel_tol = 1e-10);

// Exact quantum transmission: Kemble (Parabolic), the hyperbolic-cosine
// formula (Eckart), plane-wave matching (Rectangular).
Transmission transmission_exact(const BarrierSpec& spec, double mass, double energy);

enum class TransmissionMode { Wkb, Exact };

std::string_view to_string(TransmissionMode mode) noexcept;
TransmissionMode transmission_mode_from_string(std::string_view name);

Transmission transmission(TransmissionMode mode, const BarrierSpec& spec, double mass, double energy);

}  // namespace tunnelkit
