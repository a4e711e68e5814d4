#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tunnelkit/constants.hpp"
#include "tunnelkit/dataset.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/numeric.hpp"
#include "tunnelkit/random.hpp"

using namespace tunnelkit;
namespace C = tunnelkit::constants;

namespace {

constexpr double kB = 1.380649e-23;
constexpr double hP = 6.62607015e-34;
constexpr double hbar = hP / (2.0 * std::numbers::pi);
constexpr double NA = 6.02214076e23;

double u_of(double omega, double T) { return hbar * omega / (kB * T); }

}  // namespace

TEST_CASE("log-domain helpers") {
    CHECK(numeric::log_add(numeric::neg_inf, 2.0) == 2.0);
    CHECK(numeric::log_add(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    const std::vector<double> v{-800.0, -801.0, -1e300};
    CHECK(numeric::log_sum_exp(v) == doctest::Approx(-800.0 + std::log1p(std::exp(-1.0))));
    CHECK(numeric::softplus(800.0) == doctest::Approx(800.0));
    CHECK(numeric::log_sinh(1e-6) == doctest::Approx(std::log(1e-6)));
    CHECK(numeric::log_cosh(400.0) == doctest::Approx(400.0 - std::log(2.0)));
}

TEST_CASE("adaptive Gauss-Legendre quadrature") {
    const auto r = numeric::integrate([](double x) { return std::exp(-x) * std::sin(3.0 * x); }, 0.0, 10.0);
    const double exact = (3.0 - std::exp(-10.0) * (std::sin(30.0) + 3.0 * std::cos(30.0))) / 10.0;
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-10));
    const auto& g = numeric::gauss_legendre(16);
    double s = 0.0;
    for (double w : g.weights) s += w;
    CHECK(s == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("classical rate") {
    const double l300 = classical_rate(ThermalState::at(300.0), 0.0, 1.0);
    CHECK(std::pow(10.0, l300) == doctest::Approx(kB * 300.0 / hP).epsilon(1e-12));
    CHECK(classical_rate(ThermalState::at(600.0), 0.0, 1.0) - l300 == doctest::Approx(std::log10(2.0)));
    const double deep = classical_rate(ThermalState::at(50.0), 84.1e3 / NA, 1.0);
    const double expected = std::log10(kB * 50.0 / hP) - 84.1e3 / (8.314462618 * 50.0 * std::log(10.0));
    CHECK(std::isfinite(deep));
    CHECK(deep == doctest::Approx(expected).epsilon(1e-10));
    CHECK(deep < -70.0);
    CHECK_THROWS_AS(ThermalState::at(0.0), Error);
}

TEST_CASE("Wigner correction") {
    const double omega = 1000.0 * C::cm1_to_radps;
    const auto st = ThermalState::at(1000.0);
    const double u = u_of(omega, 1000.0);
    CHECK(u == doctest::Approx(1.4388).epsilon(1e-4));
    CHECK(wigner_kappa(st, omega) == doctest::Approx(1.0 + u * u / 24.0).epsilon(1e-14));
    CHECK(wigner_kappa(st, omega) == doctest::Approx(1.08626).epsilon(1e-5));
    CHECK(wigner_kappa(st, 1e-6) == doctest::Approx(1.0));
    const double c1 = wigner_kappa(st, omega) - 1.0;
    const double c2 = wigner_kappa(ThermalState::at(500.0), omega) - 1.0;
    CHECK(c2 / c1 == doctest::Approx(4.0).epsilon(1e-12));
    CHECK_THROWS_AS(wigner_kappa(ThermalState::at(20.0), omega), Error);
}

TEST_CASE("parabolic barrier kappa matches the closed form") {
    Rng rng(3);
    for (int i = 0; i < 40; ++i) {
        const double T = rng.uniform(300.0, 1500.0);
        const double u = rng.uniform(0.05, 2.0);
        const double omega = u * kB * T / hbar;
        const double vf_kj = rng.uniform(20.0, 40.0) * kB * T * NA / 1e3;
        const auto b = make_parabolic(vf_kj, omega / C::cm1_to_radps, 1.0);
        const auto st = ThermalState::at(T);
        const double closed = (u / 2.0) / std::sin(u / 2.0);
        const double k = std::pow(10.0, kappa(st, b, b.reference_mass, TransmissionMode::Exact));
        CHECK(std::abs(k / closed - 1.0) <= 0.01);
        CHECK(parabolic_kappa(st, omega) == doctest::Approx(closed).epsilon(1e-13));
        if (u <= 0.5) CHECK(std::abs(k / (1.0 + u * u / 24.0) - 1.0) <= 0.05);
    }
}

TEST_CASE("kappa on the catalog") {
    const auto catalog = build_catalog(CatalogConfig{}, 20240501);
    const auto grid = temperature_grid(50.0, 1000.0, 50.0);
    REQUIRE(grid.size() == 20);

    SUBCASE("WKB clamped kappa is at least one and decreasing") {
        for (const auto& s : catalog) {
            const auto k = kappa_curve(s.barrier, s.mass_H, grid, TransmissionMode::Wkb);
            for (std::size_t i = 0; i < k.size(); ++i) {
                CHECK(k[i] >= 0.0);
                if (i > 0) CHECK(k[i] < k[i - 1]);
            }
        }
    }

    SUBCASE("exact mode: decreasing, isotope ordered, rate identity") {
        for (const auto& s : catalog) {
            const auto h = rate_curve(s, Isotope::H, grid, TransmissionMode::Exact);
            const auto d = rate_curve(s, Isotope::D, grid, TransmissionMode::Exact);
            REQUIRE(h.size() == 20);
            for (std::size_t i = 0; i < h.size(); ++i) {
                CHECK(std::isfinite(h[i].log10_kappa));
                CHECK(h[i].log10_kappa >= d[i].log10_kappa);
                CHECK(std::abs(h[i].log10_k_tun - h[i].log10_k_cla - h[i].log10_kappa) <= 1e-12);
                if (i > 0) CHECK(h[i].log10_kappa < h[i - 1].log10_kappa);
            }
        }
    }

    SUBCASE("single-temperature kappa agrees with the shared-panel curve") {
        const auto& s = catalog[3];
        const std::vector<double> temps{75.0, 310.0, 990.0};
        const auto curve = kappa_curve(s.barrier, s.mass_D, temps, TransmissionMode::Exact);
        for (std::size_t i = 0; i < temps.size(); ++i) {
            const double one = kappa(ThermalState::at(temps[i]), s.barrier, s.mass_D, TransmissionMode::Exact);
            CHECK(one == doctest::Approx(curve[i]).epsilon(1e-7));
        }
    }
}

TEST_CASE("deep tunneling at 50 K stays finite") {
    const auto b = make_eckart(84.1, 60.0, 1500.0, C::mass_H_amu);
    for (auto mode : {TransmissionMode::Wkb, TransmissionMode::Exact}) {
        const double lk = kappa(ThermalState::at(50.0), b, b.reference_mass, mode);
        CHECK(std::isfinite(lk));
        CHECK(lk > 1.0);
    }
}

TEST_CASE("extreme temperatures and barriers give finite outputs") {
    for (double vf : {20.0, 80.0, 200.0}) {
        const auto b = make_eckart(vf, 0.7 * vf, 1400.0, C::mass_H_amu);
        const std::vector<double> temps{50.0, 500.0, 5000.0};
        for (auto mode : {TransmissionMode::Wkb, TransmissionMode::Exact}) {
            for (double v : kappa_curve(b, b.reference_mass, temps, mode)) CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("KIE") {
    auto catalog = build_catalog(CatalogConfig{}, 1);
    const auto& s = catalog[0];
    const std::vector<double> grid{300.0};
    const auto h = rate_curve(s, Isotope::H, grid, TransmissionMode::Exact);
    CHECK(kie(h[0], h[0]) == 0.0);

    ReactionSystem same = s;
    same.zpe_shift = 0.0;
    const auto hh = rate_curve(same, Isotope::H, grid, TransmissionMode::Exact);
    const auto dd = rate_curve(same, Isotope::D, grid, TransmissionMode::Exact);
    CHECK(kie(hh[0], dd[0]) == doctest::Approx(hh[0].log10_kappa - dd[0].log10_kappa).epsilon(1e-12));
    CHECK(kie(hh[0], dd[0]) >= 0.0);

    RatePoint a{300.0, 0.0, 0.0, 0.0};
    RatePoint b{300.0, -5.4e3 / (8.314462618 * 300.0 * std::log(10.0)), 0.0, 0.0};
    b.log10_k_tun = b.log10_k_cla;
    CHECK(std::pow(10.0, kie(a, b)) == doctest::Approx(std::exp(5.4e3 / (8.314462618 * 300.0))).epsilon(1e-12));
    CHECK(std::pow(10.0, kie(a, b)) == doctest::Approx(8.7).epsilon(0.01));
    RatePoint c = b;
    c.T = 310.0;
    CHECK_THROWS_AS(kie(a, c), Error);
}

TEST_CASE("temperature grid") {
    CHECK(temperature_grid(50.0, 1000.0, 1.0).size() == 951);
    CHECK(temperature_grid(50.0, 1000.0, 50.0).back() == 1000.0);
    const std::vector<double> bad{300.0, 200.0};
    CHECK_THROWS_AS(validate_grid(bad), Error);
}
