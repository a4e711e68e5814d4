#include "tunnelkit/kinetics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "tunnelkit/constants.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/numeric.hpp"

namespace tunnelkit {

std::string_view to_string(Site site) noexcept {
    switch (site) {
        case Site::COOH: return "COOH";
        case Site::NH2: return "NH2";
        case Site::SYNTH: return "SYNTH";
    }
    return "SYNTH";
}

Site site_from_string(std::string_view name) {
    if (name == "COOH") return Site::COOH;
    if (name == "NH2") return Site::NH2;
    if (name == "SYNTH") return Site::SYNTH;
    fail(ErrorKind::Format, "unknown site '" + std::string(name) + "'");
}

std::string_view to_string(Isotope isotope) noexcept { return isotope == Isotope::H ? "H" : "D"; }

Isotope isotope_from_string(std::string_view name) {
    if (name == "H") return Isotope::H;
    if (name == "D") return Isotope::D;
    fail(ErrorKind::Format, "unknown isotope '" + std::string(name) + "'");
}

void validate(const ReactionSystem& system) {
    validate(system.barrier);
    require(system.mass_H > 0.0 && system.mass_D > system.mass_H, ErrorKind::Specification,
            "system " + system.id + ": require mass_D > mass_H > 0");
    require(system.zpe_shift >= 0.0 && std::isfinite(system.zpe_shift), ErrorKind::Specification,
            "system " + system.id + ": zpe_shift must be non-negative");
    require(system.prefactor_scale > 0.0 && std::isfinite(system.prefactor_scale),
            ErrorKind::Specification, "system " + system.id + ": prefactor_scale must be positive");
}

ThermalState ThermalState::at(double temperature) {
    require(std::isfinite(temperature) && temperature > 0.0, ErrorKind::Domain,
            "temperature must be positive");
    return {temperature, 1.0 / (constants::k_B * temperature)};
}

double classical_rate(const ThermalState& state, double activation_energy, double prefactor_scale) {
    require(activation_energy >= 0.0, ErrorKind::Domain, "activation energy must be non-negative");
    require(prefactor_scale > 0.0, ErrorKind::Domain, "prefactor scale must be positive");
    return std::log10(prefactor_scale * constants::k_B * state.T / constants::h) -
           state.beta * activation_energy / constants::ln10;
}

double wigner_kappa(const ThermalState& state, double omega_imag) {
    const double u = constants::hbar * omega_imag * state.beta;
    require(u < 2.0 * std::numbers::pi, ErrorKind::Domain, "below the crossover temperature");
    return 1.0 + u * u / 24.0;
}

double parabolic_kappa(const ThermalState& state, double omega_imag) {
    const double u = constants::hbar * omega_imag * state.beta;
    require(u < 2.0 * std::numbers::pi, ErrorKind::Domain, "below the crossover temperature");
    if (u == 0.0) return 1.0;
    return 0.5 * u / std::sin(0.5 * u);
}

namespace {

// Sub-barrier integral in reduced energy e = E / V on [lo, 1]:
//   log int P(e) exp(-b (e - 1)) de,  b = beta V.
class SubBarrierIntegral {
public:
    SubBarrierIntegral(const BarrierSpec& spec, double mass, TransmissionMode mode,
                       std::vector<double> reduced_betas, const KappaOptions& options)
        : spec_(spec), mass_(mass), mode_(mode), b_(std::move(reduced_betas)), options_(options),
          rule_(numeric::gauss_legendre(options.order)) {}

    std::vector<double> run() {
        const double lo = lower_turning_energy(spec_) / spec_.v_forward;
        const int n0 = options_.initial_panels;
        std::vector<Panel> initial;
        initial.reserve(static_cast<std::size_t>(n0));
        for (int i = 0; i < n0; ++i) {
            const double a = lo + (1.0 - lo) * i / n0;
            const double b = i + 1 == n0 ? 1.0 : lo + (1.0 - lo) * (i + 1) / n0;
            initial.push_back(make_panel(a, b));
        }
        log_totals_ = sum_panels(initial);
        // Two passes: the second re-checks negligibility against the refined totals.
        std::vector<Panel> leaves;
        for (int pass = 0; pass < 2; ++pass) {
            leaves.clear();
            for (const Panel& p : initial) refine(p, 0, leaves);
            log_totals_ = sum_panels(leaves);
        }
        return log_totals_;
    }

private:
    struct Panel {
        double a = 0.0;
        double b = 0.0;
        std::vector<double> log_value;  // per temperature
    };

    Panel make_panel(double a, double b) {
        Panel p{a, b, std::vector<double>(b_.size(), numeric::neg_inf)};
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        const std::size_t n = rule_.nodes.size();
        log_p_.resize(n);
        energies_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            energies_[i] = mid + half * rule_.nodes[i];
            log_p_[i] = std::log(rule_.weights[i] * half) +
                        transmission(mode_, spec_, mass_, energies_[i] * spec_.v_forward).log_probability;
        }
        terms_.resize(n);
        for (std::size_t t = 0; t < b_.size(); ++t) {
            for (std::size_t i = 0; i < n; ++i) {
                terms_[i] = log_p_[i] - b_[t] * (energies_[i] - 1.0);
            }
            p.log_value[t] = numeric::log_sum_exp(terms_);
        }
        return p;
    }

    std::vector<double> sum_panels(const std::vector<Panel>& panels) const {
        std::vector<double> totals(b_.size(), numeric::neg_inf);
        for (const Panel& p : panels) {
            for (std::size_t t = 0; t < b_.size(); ++t) totals[t] = numeric::log_add(totals[t], p.log_value[t]);
        }
        return totals;
    }

    void refine(const Panel& panel, int depth, std::vector<Panel>& leaves) {
        const double mid = 0.5 * (panel.a + panel.b);
        Panel left = make_panel(panel.a, mid);
        Panel right = make_panel(mid, panel.b);
        bool accepted = true;
        const double negligible = std::log(1e-15);
        for (std::size_t t = 0; t < b_.size() && accepted; ++t) {
            const double fine = numeric::log_add(left.log_value[t], right.log_value[t]);
            const double coarse = panel.log_value[t];
            if (fine == numeric::neg_inf && coarse == numeric::neg_inf) continue;
            if (std::max(fine, coarse) < log_totals_[t] + negligible) continue;
            if (std::fabs(std::expm1(coarse - fine)) > options_.rel_tol) accepted = false;
        }
        if (accepted || mid <= panel.a || mid >= panel.b) {
            leaves.push_back(std::move(left));
            leaves.push_back(std::move(right));
            return;
        }
        if (depth + 1 >= options_.max_depth) {
            std::ostringstream msg;
            msg << "kappa quadrature did not converge: panel [" << panel.a << ", " << panel.b
                << "] (reduced energy) after " << options_.max_depth << " bisections";
            fail(ErrorKind::Numerical, msg.str());
        }
        refine(left, depth + 1, leaves);
        refine(right, depth + 1, leaves);
    }

    const BarrierSpec& spec_;
    double mass_;
    TransmissionMode mode_;
    std::vector<double> b_;
    KappaOptions options_;
    const numeric::GaussRule& rule_;
    std::vector<double> log_totals_;
    std::vector<double> log_p_, energies_, terms_;
};

// log int_{1}^{1 + cutoff/b} P(e) exp(-b (e - 1)) de for the exact transmission.
double above_barrier_exact(const BarrierSpec& spec, double mass, double b, const KappaOptions& options) {
    const double upper = 1.0 + options.cutoff_kT / b;
    auto f = [&](double e) {
        const double p = transmission_exact(spec, mass, e * spec.v_forward).probability;
        return p * std::exp(-b * (e - 1.0));
    };
    numeric::AdaptiveOptions opts;
    opts.rel_tol = options.rel_tol;
    opts.order = options.order;
    opts.max_depth = options.max_depth;
    // split so each piece spans a few thermal widths
    double total = 0.0;
    const int pieces = 8;
    for (int i = 0; i < pieces; ++i) {
        const double a = 1.0 + (upper - 1.0) * i / pieces;
        const double c = 1.0 + (upper - 1.0) * (i + 1) / pieces;
        const auto r = numeric::integrate(f, a, c, opts);
        if (!r.converged) fail(ErrorKind::Numerical, "above-barrier kappa quadrature did not converge");
        total += r.value;
    }
    return std::log(total);
}

}  // namespace

std::vector<double> kappa_curve(const BarrierSpec& spec, double mass, std::span<const double> temperatures,
                                TransmissionMode mode, const KappaOptions& options) {
    validate(spec);
    require(mass > 0.0, ErrorKind::Domain, "mass must be positive");
    std::vector<double> reduced;
    reduced.reserve(temperatures.size());
    for (double T : temperatures) {
        reduced.push_back(ThermalState::at(T).beta * spec.v_forward);
    }
    if (reduced.empty()) return {};

    const std::vector<double> below = SubBarrierIntegral(spec, mass, mode, reduced, options).run();

    std::vector<double> out(reduced.size());
    for (std::size_t t = 0; t < reduced.size(); ++t) {
        const double b = reduced[t];
        double above;
        if (mode == TransmissionMode::Wkb) {
            // P = 1 above the top: (1 - e^{-cutoff}) / b
            above = std::log(-std::expm1(-options.cutoff_kT)) - std::log(b);
        } else {
            above = above_barrier_exact(spec, mass, b, options);
        }
        // kappa = b * (below + above) in reduced units
        const double log_kappa = std::log(b) + numeric::log_add(below[t], above);
        if (!std::isfinite(log_kappa)) {
            std::ostringstream msg;
            msg << "non-finite kappa at T = " << temperatures[t] << " K";
            fail(ErrorKind::Numerical, msg.str());
        }
        out[t] = log_kappa / constants::ln10;
    }
    return out;
}

double kappa(const ThermalState& state, const BarrierSpec& spec, double mass, TransmissionMode mode,
             const KappaOptions& options) {
    const double T = state.T;
    return kappa_curve(spec, mass, std::span<const double>(&T, 1), mode, options).front();
}

void validate_grid(std::span<const double> temperatures) {
    require(!temperatures.empty(), ErrorKind::Specification, "temperature grid is empty");
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        require(std::isfinite(temperatures[i]) && temperatures[i] > 0.0, ErrorKind::Specification,
                "temperature grid must be positive");
        if (i > 0) {
            require(temperatures[i] > temperatures[i - 1], ErrorKind::Specification,
                    "temperature grid must be strictly increasing");
        }
    }
}

std::vector<RatePoint> rate_curve(const ReactionSystem& system, Isotope isotope,
                                  std::span<const double> temperatures, TransmissionMode mode,
                                  const KappaOptions& options) {
    validate(system);
    validate_grid(temperatures);
    const std::vector<double> log10_kappa =
        kappa_curve(system.barrier, system.mass(isotope), temperatures, mode, options);
    std::vector<RatePoint> points;
    points.reserve(temperatures.size());
    for (std::size_t i = 0; i < temperatures.size(); ++i) {
        const ThermalState state = ThermalState::at(temperatures[i]);
        RatePoint p;
        p.T = temperatures[i];
        p.log10_k_cla = classical_rate(state, system.activation_energy(isotope), system.prefactor_scale);
        p.log10_kappa = log10_kappa[i];
        p.log10_k_tun = p.log10_k_cla + p.log10_kappa;
        points.push_back(p);
    }
    return points;
}

double kie(const RatePoint& point_H, const RatePoint& point_D) {
    require(point_H.T == point_D.T, ErrorKind::Consistency, "KIE needs rate points at equal temperature");
    return point_H.log10_k_tun - point_D.log10_k_tun;
}

std::vector<double> temperature_grid(double lo, double hi, double step) {
    require(step > 0.0 && hi >= lo && lo > 0.0, ErrorKind::Specification, "invalid temperature grid bounds");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i) grid[i] = lo + static_cast<double>(i) * step;
    return grid;
}

}  // namespace tunnelkit
