// One PASS/FAIL line per acceptance criterion. Usage:
//   tunnelkit_acceptance <config.json> <work_dir>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

#include "json.hpp"
#include "tunnelkit/config.hpp"
#include "tunnelkit/dataset.hpp"
#include "tunnelkit/eval.hpp"
#include "tunnelkit/explain.hpp"
#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/models.hpp"
#include "tunnelkit/phase.hpp"
#include "tunnelkit/pipeline.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

namespace fs = std::filesystem;
using namespace tunnelkit;
using json = nlohmann::json;

namespace {

// Independent constant values for the oracles below.
constexpr double kB = 1.380649e-23;
constexpr double kH = 6.62607015e-34;
constexpr double kHbar = kH / (2.0 * std::numbers::pi);
constexpr double kNA = 6.02214076e23;
constexpr double kAmu = 1.66053906660e-27;
constexpr double kCm1 = 2.0 * std::numbers::pi * 299792458.0 * 100.0;

struct Outcome {
    bool passed = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.passed;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1fs", secs);
    std::string timing = buf;
    if (limit_s > 0.0) {
        std::snprintf(buf, sizeof buf, " (limit %.0fs)", limit_s);
        timing += buf;
        if (secs > limit_s) {
            ok = false;
            o.detail += "; runtime limit exceeded";
        }
    }
    failures += ok ? 0 : 1;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << " [" << name << "] " << o.detail << " [" << timing
              << "]" << std::endl;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double kjmol(double v) { return v * 1.0e3 / kNA; }

Outcome transmission_oracles() {
    Rng rng(20240501);
    double worst_par = 0.0;
    int n = 0;
    while (n < 100) {
        const double vf = rng.uniform(20.0, 150.0);
        const double omega_cm1 = rng.uniform(300.0, 2500.0);
        const double m_amu = rng.uniform(0.9, 2.1);
        const auto b = make_parabolic(vf, omega_cm1, m_amu);
        const double e = b.v_forward * rng.uniform(0.0, 0.99);
        const double z = 2.0 * std::numbers::pi * (kjmol(vf) - e) / (kHbar * omega_cm1 * kCm1);
        const double ln_kemble = -(z + std::log1p(std::exp(-z)));
        if (ln_kemble > std::log(1e-3)) continue;
        const double ln_wkb = transmission_wkb(b, m_amu * kAmu, e).log_probability;
        worst_par = std::max(worst_par, std::abs(ln_wkb - ln_kemble) / std::abs(ln_kemble));
        ++n;
    }
    double worst_rect = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double v = rng.uniform(10.0, 150.0), w = rng.uniform(0.2, 2.0), m = rng.uniform(0.5, 3.0);
        const auto b = make_rectangular(v, w);
        const double e = kjmol(v) * rng.uniform(0.01, 0.99);
        const double closed = w * 1e-10 * std::sqrt(2.0 * m * kAmu * (kjmol(v) - e));
        worst_rect = std::max(worst_rect, std::abs(barrier_action(b, m * kAmu, e) / closed - 1.0));
    }
    return {worst_par <= 0.01 && worst_rect <= 1e-10,
            fmt("parabolic worst |dlnP|/|lnP| = %.3g (<= 0.01); rectangular worst rel action error = %.3g (<= 1e-10)",
                worst_par, worst_rect)};
}

Outcome classical_limit(const PipelineConfig& c) {
    const auto catalog = build_catalog(c.catalog, c.seed);
    double worst = 0.0;
    std::string who;
    for (const auto& s : catalog) {
        const double k = std::pow(10.0, kappa(ThermalState::at(5000.0), s.barrier, s.mass_H, TransmissionMode::Wkb));
        if (std::abs(k - 1.0) > worst) worst = std::abs(k - 1.0), who = s.id;
    }
    return {worst <= 0.02, fmt("WKB mode worst |kappa(5000 K) - 1| = %.4f (<= 0.02) for ", worst) + who};
}

Outcome wigner_parabolic() {
    Rng rng(7);
    double worst_par = 0.0, worst_wig = 0.0;
    int n_wig = 0;
    for (int i = 0; i < 60; ++i) {
        const double T = rng.uniform(200.0, 2000.0);
        const double u = i < 20 ? rng.uniform(0.02, 0.5) : rng.uniform(0.02, 2.0);
        const double omega = u * kB * T / kHbar;
        const double vf_kj = rng.uniform(20.0, 45.0) * kB * T * kNA / 1e3;
        const auto b = make_parabolic(vf_kj, omega / kCm1, 1.0);
        const double k = std::pow(10.0, kappa(ThermalState::at(T), b, kAmu, TransmissionMode::Exact));
        worst_par = std::max(worst_par, std::abs(k / ((u / 2.0) / std::sin(u / 2.0)) - 1.0));
        if (u <= 0.5) {
            worst_wig = std::max(worst_wig, std::abs(k / (1.0 + u * u / 24.0) - 1.0));
            ++n_wig;
        }
    }
    return {worst_par <= 0.01 && worst_wig <= 0.05 && n_wig >= 20,
            fmt("u <= 2: worst vs (u/2)/sin(u/2) = %.3g (<= 0.01); u <= 0.5: worst vs 1 + u^2/24 = %.3g (<= 0.05) on %g "
                "barriers",
                worst_par, worst_wig, n_wig)};
}

Outcome monotone_isotope(const PipelineConfig& c) {
    const auto catalog = build_catalog(c.catalog, c.seed);
    const auto grid = temperature_grid(50.0, 1000.0, 1.0);
    std::size_t mono = 0, iso = 0, points = 0;
    for (const auto& s : catalog) {
        const auto h = kappa_curve(s.barrier, s.mass_H, grid, c.transmission);
        const auto d = kappa_curve(s.barrier, s.mass_D, grid, c.transmission);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            ++points;
            if (i > 0 && !(h[i] < h[i - 1])) ++mono;
            if (h[i] < d[i]) ++iso;
        }
    }
    return {mono == 0 && iso == 0 && catalog.size() == 20,
            std::to_string(catalog.size()) + " systems x 951 T (" + std::string(to_string(c.transmission)) +
                " mode): " + std::to_string(mono) + " monotonicity and " + std::to_string(iso) +
                " isotope-order violations in " + std::to_string(points) + " points"};
}

Outcome deep_tunneling() {
    const auto b = make_eckart(84.1, 84.1 * (1.0 - 0.45), 650.0, 1.00782503207);
    const double m = 1.00782503207 * kAmu;
    const double exact = kappa(ThermalState::at(50.0), b, m, TransmissionMode::Exact);
    const double wkb = kappa(ThermalState::at(50.0), b, m, TransmissionMode::Wkb);
    return {std::isfinite(exact) && std::isfinite(wkb),
            fmt("84.1 kJ/mol barrier at 50 K: log10 kappa = %.3f (exact), %.3f (WKB)", exact, wkb)};
}

Outcome arrhenius(const PipelineConfig& c) {
    Rng rng(99);
    const double R = kB * kNA;
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double la = rng.uniform(4.0, 14.0), m = rng.uniform(-2.0, 3.0), ea = rng.uniform(5.0, 150.0);
        std::vector<RatePointLog10> pts;
        for (double T = 50.0; T <= 1000.0; T += 50.0) {
            pts.push_back({T, la + m * std::log10(T) - ea * 1e3 / (R * T * std::log(10.0))});
        }
        const auto f = fit_arrhenius3(pts);
        worst = std::max({worst, std::abs(f.log10_A / la - 1.0), std::abs(f.m_exp - m) / std::max(1.0, std::abs(m)),
                          std::abs(f.E_a / ea - 1.0)});
    }
    const auto catalog = build_catalog(c.catalog, c.seed);
    const auto raw = sweep(catalog, temperature_grid(50.0, 1000.0, 50.0), c.transmission);
    const auto fits = fit_curves(raw, c.grid.fit_window.lo, c.grid.fit_window.hi);
    std::vector<std::string> ids;
    for (const auto& s : catalog) ids.push_back(s.id);
    const auto dense = augment(fits, ids, 50.0, 1000.0, 1.0);
    std::map<std::string, std::size_t> per;
    for (const auto& d : dense) ++per[d.system_id];
    bool all951 = per.size() == catalog.size();
    for (const auto& [id, n] : per) all951 = all951 && n == 951;
    return {worst <= 1e-8 && all951,
            fmt("worst relative parameter error = %.3g (<= 1e-8); ", worst) +
                (all951 ? "every augmented curve has 951 points" : "augmented curve length != 951")};
}

Outcome benchmark_protocol(const fs::path& dir, double bench_seconds) {
    const auto doc = json::parse(read_file(dir / "bench.json"));
    const auto& kf = doc.at("summary").at("kfold");
    const auto& loo = doc.at("summary").at("loo");
    bool a = true;
    std::string detail = "(a) k-fold:";
    for (const char* f : {"gbdt", "xgb"}) {
        const double r2 = kf.at(f).at("test_r2_mean").get<double>();
        const double d = kf.at(f).at("delta_r2_mean").get<double>();
        a = a && r2 >= 0.98 && d <= 0.02;
        detail += std::string(" ") + f + fmt(" test R2 %.4f, dR2 %.4f;", r2, d);
    }
    auto rm = [&](const char* f) { return loo.at(f).at("test_rmse_mean").get<double>(); };
    const double xgb = rm("xgb"), gbdt = rm("gbdt"), rf = rm("random_forest");
    const double worst_simple = std::max({rm("ridge"), rm("plsr"), rm("extra_trees")});
    const bool b = xgb <= gbdt && gbdt < rf && rf < worst_simple;
    detail += fmt(" (b) LOO mean RMSE xgb %.3f, gbdt %.3f, rf %.3f", xgb, gbdt, rf) +
              fmt(", ridge %.3f, plsr %.3f, et %.3f", rm("ridge"), rm("plsr"), rm("extra_trees")) +
              (b ? " ordered" : " NOT ordered") + fmt("; benchmark stage %.0fs (limit 900s)", bench_seconds) +
              (bench_seconds > 900.0 ? ", runtime limit exceeded" : "");
    return {a && b && bench_seconds <= 900.0, detail};
}

Outcome shapley(const fs::path& dir, std::uint64_t seed) {
    const auto records = dataset_from_csv(read_file(dir / "dataset.csv"));
    const auto train_rows = sample_rows(records.size(), 3000, derive_seed(seed, 1));
    const auto x = features_of(records, train_rows);
    const auto y = targets_of(records, train_rows);
    const auto rows = features_of(records, sample_rows(records.size(), 100, derive_seed(seed, 2)));
    const auto bg = features_of(records, sample_rows(records.size(), 256, derive_seed(seed, 3)));
    FeatureMatrix x_flat = x;
    for (std::size_t i = 0; i < x_flat.rows; ++i) x_flat(i, 3) = 0.25;

    double worst_acc = 0.0, worst_lin = 0.0;
    std::size_t nonzero_ignored = 0;
    for (Family f : kAllFamilies) {
        auto hp = default_hyperparameters(f);
        if (hp.count("n_trees")) hp["n_trees"] = 50;
        const auto model = fit(f, hp, x, y, 1);
        const auto rep = shapley_exact(model, rows, bg);
        for (std::size_t i = 0; i < rows.rows; ++i) {
            double s = rep.base_value;
            for (double v : rep.phi[i]) s += v;
            const double fx = predict_row(model, rows.row(i));
            worst_acc = std::max(worst_acc, std::abs(s - fx) / std::max(1.0, std::abs(fx)));
        }
        if (is_tree_family(f)) {
            const auto flat = fit(f, hp, x_flat, y, 1);
            for (const auto& phi : shapley_exact(flat, rows, bg).phi) nonzero_ignored += phi[3] != 0.0;
        } else {
            const auto w = model.raw_coefficients();
            std::array<double, 4> mean{};
            for (std::size_t i = 0; i < bg.rows; ++i) {
                for (std::size_t j = 0; j < 4; ++j) mean[j] += bg(i, j) / static_cast<double>(bg.rows);
            }
            for (std::size_t i = 0; i < rows.rows; ++i) {
                for (std::size_t j = 0; j < 4; ++j) {
                    const double expect = w[j] * (rows(i, j) - mean[j]);
                    worst_lin = std::max(worst_lin, std::abs(rep.phi[i][j] - expect) / std::max(1.0, std::abs(expect)));
                }
            }
            TrainedModel zeroed = model;
            zeroed.linear.coefficients[3] = 0.0;
            for (const auto& phi : shapley_exact(zeroed, rows, bg).phi) nonzero_ignored += phi[3] != 0.0;
        }
    }
    return {worst_acc <= 1e-9 && worst_lin <= 1e-9 && nonzero_ignored == 0,
            fmt("6 families x 100 rows: worst local-accuracy error %.3g (<= 1e-9), linear closed-form error %.3g "
                "(<= 1e-9), ",
                worst_acc, worst_lin) +
                std::to_string(nonzero_ignored) + " nonzero phi for ignored features"};
}

Outcome phase_diagram(const fs::path& dir) {
    const auto doc = json::parse(read_file(dir / "phase_summary.json"));
    bool decreasing = true, anomaly = false;
    double prev = 1e300;
    std::string meds;
    for (const auto& p : doc) {
        const double m = p.at("median_log10_kappa").get<double>();
        const double T = p.at("panel_T").get<double>();
        decreasing = decreasing && m < prev;
        prev = m;
        if (T >= 300.0 && T <= 600.0 && p.at("anomalies").get<int>() > 0) anomaly = true;
        meds += fmt("%.0f:%.3f ", T, m);
    }
    std::size_t svgs = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name.rfind("phase_", 0) == 0 && e.path().extension() == ".svg") ++svgs;
    }
    const bool ok = doc.size() == 8 && svgs == 8 && decreasing && anomaly;
    return {ok, std::to_string(doc.size()) + " panels, " + std::to_string(svgs) + " SVGs; median log10 kappa " + meds +
                    (decreasing ? "strictly decreasing" : "NOT decreasing") +
                    (anomaly ? "; anomaly present in 300-600 K" : "; no anomaly in 300-600 K")};
}

Outcome determinism(const fs::path& a, const fs::path& b) {
    std::vector<std::string> files{"catalog.json", "dataset.csv", "bench.json", "shap.csv", "phase.csv"};
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() == ".svg") files.push_back(e.path().filename().string());
    }
    std::sort(files.begin() + 5, files.end());
    std::string differ;
    for (const auto& f : files) {
        if (!fs::exists(b / f) || read_file(a / f) != read_file(b / f)) differ += " " + f;
    }
    return {differ.empty() && files.size() == 13,
            std::to_string(files.size()) + " artifacts compared" + (differ.empty() ? ", all byte-identical" : "; differ:" + differ)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 3) {
        std::cerr << "usage: tunnelkit_acceptance <config.json> <work_dir>\n";
        return 2;
    }
    const auto config = load_config(argv[1]);
    const fs::path work = argv[2];
    const fs::path run_a = work / "run_a", run_b = work / "run_b";
    fs::remove_all(run_a);
    fs::remove_all(run_b);
    fs::create_directories(run_a);
    fs::create_directories(run_b);

    report(1, "transmission oracles", 5.0, transmission_oracles);
    report(2, "kappa classical limit", 10.0, [&] { return classical_limit(config); });
    report(3, "Wigner/parabolic oracle", 10.0, wigner_parabolic);
    report(4, "monotonicity and isotope ordering", 30.0, [&] { return monotone_isotope(config); });
    report(5, "deep-tunneling stability", 1.0, deep_tunneling);
    report(6, "Arrhenius round trip", 5.0, [&] { return arrhenius(config); });

    std::ofstream log_a(work / "run_a.log"), log_b(work / "run_b.log");
    double bench_seconds = 0.0, phase_seconds = 0.0;
    auto timed = [](const std::function<void()>& f) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    const auto t_a = std::chrono::steady_clock::now();
    bool run_a_ok = true;
    try {
        timed([&] { run_gen(config, run_a, log_a); });
        timed([&] { run_augment(config, run_a, log_a); });
        phase_seconds = timed([&] { run_phase(config, run_a, log_a); });
        timed([&] { run_train(config, run_a, config.model.train_family, PlanKind::KFold, 0, log_a); });
        timed([&] { run_explain(config, run_a, run_a / "model.json", log_a); });
        bench_seconds = timed([&] { run_benchmark(config, run_a, log_a); });
    } catch (const std::exception& e) {
        std::cout << "pipeline run A failed: " << e.what() << std::endl;
        run_a_ok = false;
    }
    const double run_a_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_a).count();
    std::cout << fmt("pipeline run A finished in %.0fs", run_a_seconds) << std::endl;

    report(7, "benchmark protocol", 0.0, [&] {
        if (!run_a_ok) return Outcome{false, "pipeline run failed"};
        return benchmark_protocol(run_a, bench_seconds);
    });
    report(8, "Shapley exactness", 60.0, [&] { return shapley(run_a, config.seed); });
    report(9, "phase diagram", 60.0, [&] {
        auto o = phase_diagram(run_a);
        o.detail += fmt("; phase stage %.2fs (limit 60s)", phase_seconds);
        o.passed = o.passed && phase_seconds <= 60.0;
        return o;
    });
    report(10, "determinism", 0.0, [&] {
        run_pipeline(config, run_b, log_b);
        return determinism(run_a, run_b);
    });

    std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
              << std::endl;
    return failures == 0 ? 0 : 1;
}
