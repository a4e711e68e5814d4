#include <cmath>
#include <set>

#include "doctest.h"
#include "tunnelkit/constants.hpp"
#include "tunnelkit/dataset.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

using namespace tunnelkit;

namespace {

constexpr double kR = 8.314462618;

std::vector<RatePointLog10> generate(double log10_A, double m, double ea_kj, double lo, double hi, double step) {
    std::vector<RatePointLog10> pts;
    for (double T = lo; T <= hi + 1e-9; T += step) {
        pts.push_back({T, log10_A + m * std::log10(T) - ea_kj * 1e3 / (kR * T * std::log(10.0))});
    }
    return pts;
}

}  // namespace

TEST_CASE("catalog") {
    const auto cat = build_catalog(CatalogConfig{}, 7);
    REQUIRE(cat.size() == 20);
    int named = 0, synth = 0;
    std::set<std::string> ids;
    for (const auto& s : cat) {
        (s.site == Site::SYNTH ? synth : named)++;
        ids.insert(s.id);
        CHECK_NOTHROW(validate(s));
        CHECK(s.barrier.asymmetry() >= 0.0);
        CHECK(s.barrier.asymmetry() < 1.0);
    }
    CHECK(named == 8);
    CHECK(synth == 12);
    CHECK(ids.size() == 20);
    CHECK(catalog_to_json(cat) == catalog_to_json(build_catalog(CatalogConfig{}, 7)));
    CHECK(catalog_to_json(cat) != catalog_to_json(build_catalog(CatalogConfig{}, 8)));
    CHECK(catalog_to_json(catalog_from_json(catalog_to_json(cat))) == catalog_to_json(cat));

    CatalogConfig bad;
    bad.eta = {0.6, 0.2};
    CHECK_THROWS_AS(build_catalog(bad, 1), Error);
}

TEST_CASE("Glu-NH2 anchor reproduces a low activation energy") {
    const auto cat = build_catalog(CatalogConfig{}, 20240501);
    const ReactionSystem* glu = nullptr;
    for (const auto& s : cat) {
        if (s.id == "glu_nh2") glu = &s;
    }
    REQUIRE(glu != nullptr);
    const auto grid = temperature_grid(50.0, 1000.0, 50.0);
    const auto raw = sweep({*glu}, grid, TransmissionMode::Exact);
    const auto fits = fit_curves(raw, 300.0, 1000.0);
    const auto& f = fits.at(FitKey{"glu_nh2", Isotope::H, RateKind::Tunneling});
    MESSAGE("Glu-NH2 quantum-rate fit: Ea = " << f.E_a << " kJ/mol, log10 A = " << f.log10_A << ", m = " << f.m_exp);
    CHECK(f.residual_rmse <= 0.15);
    CHECK(std::isfinite(f.E_a));
}

TEST_CASE("sweep") {
    const auto cat = build_catalog(CatalogConfig{}, 3);
    const auto raw = sweep(cat, temperature_grid(50.0, 1000.0, 50.0), TransmissionMode::Exact);
    CHECK(raw.size() == 800);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& r = raw[i];
        CHECK(std::abs(r.log10_k_tun - r.log10_k_cla - r.log10_kappa) <= 1e-12);
        if (i > 0) {
            const auto& p = raw[i - 1];
            CHECK(std::tie(p.system_id, p.isotope, p.T) < std::tie(r.system_id, r.isotope, r.T));
        }
    }
    const std::string csv = raw_curves_to_csv(raw);
    CHECK(csv.rfind("system_id,isotope,T_K,log10_k_cla,log10_kappa,log10_k_tun\n", 0) == 0);
    CHECK(raw_curves_to_csv(raw_curves_from_csv(csv)) == csv);
}

TEST_CASE("Arrhenius round trip on random parameters") {
    Rng rng(101);
    for (int i = 0; i < 100; ++i) {
        const double la = rng.uniform(5.0, 14.0), m = rng.uniform(-2.0, 3.0), ea = rng.uniform(5.0, 150.0);
        const auto f = fit_arrhenius3(generate(la, m, ea, 50.0, 1000.0, 50.0));
        CHECK(std::abs(f.log10_A / la - 1.0) <= 1e-8);
        CHECK(std::abs(f.m_exp - m) <= 1e-8 * std::max(1.0, std::abs(m)));
        CHECK(std::abs(f.E_a / ea - 1.0) <= 1e-8);
    }
    const auto f = fit_arrhenius3(generate(12.0, 0.0, 50.0, 200.0, 1000.0, 50.0));
    CHECK(std::abs(f.m_exp) <= 1e-8);
    CHECK(f.E_a == doctest::Approx(50.0).epsilon(1e-8));
    CHECK(f.residual_rmse <= 1e-9);

    auto three = generate(12.0, 0.0, 50.0, 200.0, 300.0, 50.0);
    REQUIRE(three.size() == 3);
    CHECK_THROWS_AS(fit_arrhenius3(three), Error);
    std::vector<RatePointLog10> same(6, RatePointLog10{300.0, 1.0});
    CHECK_THROWS_AS(fit_arrhenius3(same), Error);
}

TEST_CASE("augmentation") {
    const auto cat = build_catalog(CatalogConfig{}, 3);
    const auto raw = sweep(cat, temperature_grid(50.0, 1000.0, 50.0), TransmissionMode::Exact);
    const auto fits = fit_curves(raw, 300.0, 1000.0);
    CHECK(fits.size() == 60);
    CHECK(fits_to_csv(fits_from_csv(fits_to_csv(fits))) == fits_to_csv(fits));
    std::vector<std::string> ids;
    for (const auto& s : cat) ids.push_back(s.id);

    const auto dense = augment(fits, ids, 50.0, 1000.0, 1.0);
    CHECK(dense.size() == 20 * 951);
    for (const auto& d : dense) {
        CHECK(std::abs(d.log10_kie - (d.log10_k_tun_H - d.log10_k_tun_D)) <= 1e-12);
        CHECK(std::abs(d.log10_kappa - (d.log10_k_tun_H - d.log10_k_cla_H)) <= 1e-12);
    }
    const auto coarse = augment(fits, ids, 50.0, 1000.0, 50.0);
    for (std::size_t i = 0; i < 20; ++i) CHECK(coarse[i].T == 50.0 * static_cast<double>(i + 1));

    FitTable partial = fits;
    partial.erase(partial.begin());
    CHECK_THROWS_AS(augment(partial, ids, 50.0, 1000.0, 1.0), Error);
}

TEST_CASE("direct dataset") {
    CatalogConfig cc;
    cc.n_systems = 10;
    const auto cat = build_catalog(cc, 3);
    const auto dense = direct_curves(cat, 50.0, 1000.0, 5.0, TransmissionMode::Exact);
    CHECK(dense.size() == 10 * 191);
    const auto records = assemble(dense, cat);
    CHECK(records.size() == dense.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& d = dense[i];
        CHECK(std::abs(d.log10_kie - (d.log10_k_tun_H - d.log10_k_tun_D)) <= 1e-12);
        CHECK(std::abs(d.log10_kappa - (d.log10_k_tun_H - d.log10_k_cla_H)) <= 1e-12);
        const auto& r = records[i];
        const auto it = std::find_if(cat.begin(), cat.end(), [&](const auto& s) { return s.id == r.system_id; });
        REQUIRE(it != cat.end());
        CHECK(r.eta == it->barrier.asymmetry());
        CHECK(r.T >= 50.0);
        CHECK(r.T <= 1000.0);
    }
    const std::string csv = dataset_to_csv(records);
    CHECK(csv.rfind("system_id,T_K,log10_kie,log10_k_tun,eta,log10_kappa\n", 0) == 0);
    CHECK(dataset_to_csv(dataset_from_csv(csv)) == csv);
    CHECK(dataset_to_csv(assemble(direct_curves(cat, 50.0, 1000.0, 5.0, TransmissionMode::Exact), cat)) == csv);

    auto broken = dense;
    broken[5].log10_kie = std::nan("");
    try {
        assemble(broken, cat);
        FAIL("expected a data error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Data);
    }
}

TEST_CASE("csv helpers") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(parse_double(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(quote_field("a,b") == "\"a,b\"");
    CHECK(quote_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    const auto t = parse_csv("a,b\n1,\"x,y\"\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(read_file("/nonexistent/file.csv"), Error);
}
