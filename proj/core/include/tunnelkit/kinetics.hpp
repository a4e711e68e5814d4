#pragma once

#include <span>
#include <vector>

#include "tunnelkit/physics.hpp"
#include "tunnelkit/reaction.hpp"

namespace tunnelkit {

struct ThermalState {
    double T = 0.0;     // K
    double beta = 0.0;  // 1/J

    // Throws Domain unless T > 0.
    static ThermalState at(double temperature);
};

// Rates in log10 s^-1. log10_k_tun == log10_k_cla + log10_kappa by construction.
struct RatePoint {
    double T = 0.0;
    double log10_k_cla = 0.0;
    double log10_kappa = 0.0;
    double log10_k_tun = 0.0;
};

// log10 of prefactor_scale * k_B T / h * exp(-beta E_act).
double classical_rate(const ThermalState& state, double activation_energy, double prefactor_scale);

struct KappaOptions {
    double rel_tol = 1e-8;         // per-panel agreement of the Boltzmann integral
    double cutoff_kT = 40.0;       // E_max = v_forward + cutoff_kT * k_B T
    int initial_panels = 24;
    int max_depth = 60;
    int order = 16;
};

// Tunneling correction factor
//
//   kappa = int P(E) e^{-beta E} dE / int Theta(E - V) e^{-beta E} dE
//
// over [0, V + cutoff k_B T], the denominator taken analytically as
// e^{-beta V} / beta. The sub-barrier numerator is summed panel by panel in the
// log domain. Returns log10 kappa.
double kappa(const ThermalState& state, const BarrierSpec& spec, double mass, TransmissionMode mode,
             const KappaOptions& options = {});

// kappa at many temperatures sharing one set of transmission evaluations: the
// sub-barrier panels are refined until every requested temperature converges.
std::vector<double> kappa_curve(const BarrierSpec& spec, double mass, std::span<const double> temperatures,
                                TransmissionMode mode, const KappaOptions& options = {});

// 1 + u^2 / 24 with u = hbar omega / k_B T. Throws Domain when u >= 2 pi.
double wigner_kappa(const ThermalState& state, double omega_imag);

// Closed-form parabolic-barrier kappa (u/2) / sin(u/2) for u < 2 pi.
double parabolic_kappa(const ThermalState& state, double omega_imag);

// Throws Specification unless the grid is strictly increasing and positive.
void validate_grid(std::span<const double> temperatures);

std::vector<RatePoint> rate_curve(const ReactionSystem& system, Isotope isotope,
                                  std::span<const double> temperatures, TransmissionMode mode,
                                  const KappaOptions& options = {});

// log10 KIE = log10 k_tun(H) - log10 k_tun(D); throws Consistency on a
// temperature mismatch.
double kie(const RatePoint& point_H, const RatePoint& point_D);

// Temperatures lo, lo + step, ..., up to hi inclusive (within half a step).
std::vector<double> temperature_grid(double lo, double hi, double step);

}  // namespace tunnelkit
