#include "tunnelkit/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>

#include "tunnelkit/constants.hpp"
#include "tunnelkit/dataset.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/random.hpp"

namespace tunnelkit {

namespace {

namespace C = constants;

std::string fmt(const char* f, double a, double b = 0.0) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

OracleCheck run(const std::string& name, const std::function<OracleCheck()>& body) {
    try {
        OracleCheck c = body();
        c.name = name;
        return c;
    } catch (const std::exception& e) {
        return {name, false, std::string("threw: ") + e.what()};
    }
}

OracleCheck constants_check() {
    const double rel = std::abs(C::hbar * 2.0 * std::numbers::pi - C::h) / C::h;
    const double k300 = C::k_B * 300.0 / C::h;
    const bool ok = rel <= 4e-16 && std::abs(k300 / 6.2511e12 - 1.0) < 1e-4;
    return {"", ok, fmt("hbar rel err %.2g, k_B*300/h = %.6g", rel, k300)};
}

OracleCheck parabolic_kemble() {
    Rng rng(1);
    int n = 0;
    double worst = 0.0;
    while (n < 100) {
        const auto spec = make_parabolic(rng.uniform(20.0, 140.0), rng.uniform(400.0, 2500.0), C::mass_H_amu);
        const double mass = (rng.uniform() < 0.5 ? C::mass_H_amu : C::mass_D_amu) * C::amu;
        const double e = spec.v_forward * rng.uniform(0.05, 0.999);
        const auto exact = transmission_exact(spec, mass, e);
        if (exact.probability > 1e-3) continue;
        const auto wkb = transmission_wkb(spec, mass, e);
        worst = std::max(worst, std::abs(wkb.log_probability - exact.log_probability) / std::abs(exact.log_probability));
        ++n;
    }
    return {"", worst <= 0.01, fmt("100 barriers, worst |dlnP|/|lnP| = %.3g", worst)};
}

OracleCheck rectangular_action() {
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto spec = make_rectangular(rng.uniform(10.0, 200.0), rng.uniform(0.1, 3.0));
        const double mass = rng.uniform(0.5, 5.0) * C::amu;
        const double e = spec.v_forward * rng.uniform(0.0, 0.99);
        const double closed = spec.width * std::sqrt(2.0 * mass * (spec.v_forward - e));
        worst = std::max(worst, std::abs(barrier_action(spec, mass, e) - closed) / closed);
    }
    return {"", worst <= 1e-10, fmt("100 draws, worst relative action error %.3g", worst)};
}

OracleCheck eckart_curvature(const std::vector<ReactionSystem>& catalog) {
    double worst = 0.0;
    for (const auto& s : catalog) {
        const auto& b = s.barrier;
        if (b.shape != BarrierShape::Eckart) continue;
        const double x0 = barrier_top_position(b);
        // central differences at h and h/2, Richardson-combined to O(h^4)
        auto fd = [&](double h) {
            return (potential(b, x0 + h) - 2.0 * potential(b, x0) + potential(b, x0 - h)) / (h * h);
        };
        const double h = 1e-3 * eckart_geometry(b).length;
        const double d2 = (4.0 * fd(0.5 * h) - fd(h)) / 3.0;
        const double target = -b.reference_mass * b.omega_imag * b.omega_imag;
        worst = std::max(worst, std::abs(d2 / target - 1.0));
    }
    return {"", worst <= 1e-6, fmt("worst relative curvature error %.3g", worst)};
}

OracleCheck eckart_deep(const std::vector<ReactionSystem>& catalog) {
    double worst = 0.0;
    int n = 0;
    for (const auto& s : catalog) {
        const auto& b = s.barrier;
        for (double f : {0.2, 0.4, 0.6, 0.8}) {
            const double e = lower_turning_energy(b) + f * (b.v_forward - lower_turning_energy(b));
            for (double m : {s.mass_H, s.mass_D}) {
                const auto exact = transmission_exact(b, m, e);
                if (exact.probability > 1e-4) continue;
                const auto wkb = transmission_wkb(b, m, e);
                worst = std::max(worst,
                                 std::abs(exact.log_probability - wkb.log_probability) / std::abs(exact.log_probability));
                ++n;
            }
        }
    }
    return {"", n > 0 && worst <= 0.05, fmt("%g deep-tunneling points, worst %.3g", n, worst)};
}

OracleCheck probability_bounds(const std::vector<ReactionSystem>& catalog) {
    Rng rng(3);
    int bad = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto& s = catalog[static_cast<std::size_t>(rng.below(catalog.size()))];
        const double e = s.barrier.v_forward * rng.uniform(0.0, 1.5);
        for (auto mode : {TransmissionMode::Wkb, TransmissionMode::Exact}) {
            const double p = transmission(mode, s.barrier, s.mass_H, e).probability;
            if (!(p >= 0.0 && p <= 1.0)) ++bad;
        }
    }
    return {"", bad == 0, fmt("%g of 4000 evaluations outside [0, 1]", bad)};
}

OracleCheck parabolic_kappa_check() {
    double worst = 0.0;
    for (double omega : {600.0, 1000.0, 1500.0}) {
        const auto spec = make_parabolic(120.0, omega, C::mass_H_amu);
        for (double u : {0.25, 0.5, 1.0, 1.5, 2.0}) {
            const double T = C::hbar * spec.omega_imag / (C::k_B * u);
            const auto st = ThermalState::at(T);
            if (spec.v_forward < 20.0 * C::k_B * T) continue;
            const double k = std::pow(10.0, kappa(st, spec, spec.reference_mass, TransmissionMode::Exact));
            worst = std::max(worst, std::abs(k / parabolic_kappa(st, spec.omega_imag) - 1.0));
        }
    }
    return {"", worst <= 0.01, fmt("u <= 2, worst relative error %.3g", worst)};
}

OracleCheck wigner_check() {
    double worst = 0.0;
    const auto spec = make_parabolic(120.0, 1000.0, C::mass_H_amu);
    for (double u : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        const double T = C::hbar * spec.omega_imag / (C::k_B * u);
        const auto st = ThermalState::at(T);
        const double k = std::pow(10.0, kappa(st, spec, spec.reference_mass, TransmissionMode::Exact));
        worst = std::max(worst, std::abs(k / wigner_kappa(st, spec.omega_imag) - 1.0));
    }
    return {"", worst <= 0.05, fmt("u <= 0.5, worst relative error %.3g", worst)};
}

OracleCheck classical_limit(const std::vector<ReactionSystem>& catalog, TransmissionMode mode) {
    double worst = 0.0;
    const auto st = ThermalState::at(5000.0);
    for (const auto& s : catalog) {
        worst = std::max(worst, std::abs(std::pow(10.0, kappa(st, s.barrier, s.mass_H, mode)) - 1.0));
    }
    return {"", worst <= 0.02, fmt("worst |kappa(5000 K) - 1| = %.3g", worst)};
}

OracleCheck monotonicity(const std::vector<ReactionSystem>& catalog, TransmissionMode mode) {
    const auto grid = temperature_grid(50.0, 1000.0, 50.0);
    int violations = 0;
    for (const auto& s : catalog) {
        const auto h = rate_curve(s, Isotope::H, grid, mode);
        const auto d = rate_curve(s, Isotope::D, grid, mode);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (i > 0 && !(h[i].log10_kappa < h[i - 1].log10_kappa)) ++violations;
            if (h[i].log10_kappa < d[i].log10_kappa) ++violations;
            const double id = h[i].log10_k_tun - h[i].log10_k_cla - h[i].log10_kappa;
            if (std::abs(id) > 1e-12) ++violations;
        }
    }
    return {"", violations == 0, fmt("%g systems x 20 temperatures, %g violations", catalog.size(), violations)};
}

OracleCheck deep_tunneling(const std::vector<ReactionSystem>& catalog, TransmissionMode mode) {
    const auto it = std::find_if(catalog.begin(), catalog.end(), [](const ReactionSystem& s) { return s.id == "glu_nh2"; });
    const double eta = it != catalog.end() ? it->barrier.asymmetry() : 0.45;
    const double omega = it != catalog.end() ? it->barrier.omega_imag / C::cm1_to_radps : 650.0;
    const auto spec = make_eckart(84.1, 84.1 * (1.0 - eta), omega, C::mass_H_amu);
    const double lk = kappa(ThermalState::at(50.0), spec, spec.reference_mass, mode);
    return {"", std::isfinite(lk), fmt("84.1 kJ/mol at 50 K: log10 kappa = %.4g", lk)};
}

OracleCheck arrhenius_round_trip() {
    Rng rng(4);
    double worst = 0.0;
    const auto grid = temperature_grid(200.0, 1000.0, 50.0);
    for (int i = 0; i < 100; ++i) {
        ArrheniusFit truth{rng.uniform(5.0, 15.0), rng.uniform(-2.0, 3.0), rng.uniform(20.0, 150.0), 0.0};
        std::vector<RatePointLog10> pts;
        for (double T : grid) pts.push_back({T, truth.log10_rate(T)});
        const auto fit = fit_arrhenius3(pts);
        worst = std::max({worst, std::abs(fit.log10_A / truth.log10_A - 1.0), std::abs(fit.m_exp / truth.m_exp - 1.0),
                          std::abs(fit.E_a / truth.E_a - 1.0)});
    }
    return {"", worst <= 1e-8, fmt("100 draws, worst relative parameter error %.3g", worst)};
}

OracleCheck zpe_kie() {
    // equal kappa for both isotopologues, so only the zero-point shift remains
    const auto spec = make_eckart(80.0, 60.0, 1000.0, C::mass_H_amu);
    const double zpe = 5.4 * C::kJmol_to_J;
    const auto st = ThermalState::at(300.0);
    const double lk = kappa(st, spec, spec.reference_mass, TransmissionMode::Exact);
    const double cla_h = classical_rate(st, spec.v_forward, 1.0);
    const double cla_d = classical_rate(st, spec.v_forward + zpe, 1.0);
    const RatePoint h{st.T, cla_h, lk, cla_h + lk};
    const RatePoint d{st.T, cla_d, lk, cla_d + lk};
    const double k = std::pow(10.0, kie(h, d));
    const double expect = std::exp(zpe * st.beta);
    return {"", std::abs(k / expect - 1.0) < 1e-10 && std::abs(k - 8.7) < 0.05,
            fmt("KIE = %.5g (expected %.5g)", k, expect)};
}

}  // namespace

std::vector<OracleCheck> run_physics_oracles(const PipelineConfig& config) {
    const auto catalog = build_catalog(config.catalog, config.seed);
    const auto mode = config.transmission;
    std::vector<OracleCheck> out;
    out.push_back(run("constants", constants_check));
    out.push_back(run("parabolic_wkb_vs_kemble", parabolic_kemble));
    out.push_back(run("rectangular_action_closed_form", rectangular_action));
    out.push_back(run("eckart_curvature_calibration", [&] { return eckart_curvature(catalog); }));
    out.push_back(run("eckart_exact_vs_wkb_deep", [&] { return eckart_deep(catalog); }));
    out.push_back(run("transmission_in_unit_interval", [&] { return probability_bounds(catalog); }));
    out.push_back(run("parabolic_kappa_closed_form", parabolic_kappa_check));
    out.push_back(run("wigner_high_temperature", wigner_check));
    out.push_back(run("classical_limit_5000K", [&] { return classical_limit(catalog, mode); }));
    out.push_back(run("kappa_monotone_and_isotope_order", [&] { return monotonicity(catalog, mode); }));
    out.push_back(run("deep_tunneling_50K_finite", [&] { return deep_tunneling(catalog, mode); }));
    out.push_back(run("arrhenius_round_trip", arrhenius_round_trip));
    out.push_back(run("zpe_kie", zpe_kie));
    return out;
}

}  // namespace tunnelkit
