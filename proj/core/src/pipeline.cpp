#include "tunnelkit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "tunnelkit/dataset.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/explain.hpp"
#include "tunnelkit/phase.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/search.hpp"
#include "tunnelkit/table_io.hpp"
#include "tunnelkit/validation.hpp"

namespace tunnelkit {

namespace {

using ojson = nlohmann::ordered_json;

// Seeds of the independent random streams, all derived from config.seed.
enum Stream : std::uint64_t { kSplitStream = 1, kTrainStream = 2, kBenchStream = 3, kExplainStream = 4 };

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string secs(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1fs", s);
    return buf;
}

std::vector<DatasetRecord> load_dataset(const fs::path& dir) {
    return dataset_from_csv(read_file(dir / "dataset.csv"));
}

std::vector<SplitPlan> plans_of(const PipelineConfig& c, const std::vector<DatasetRecord>& records, PlanKind kind) {
    const auto ids = system_ids_of(records);
    const std::uint64_t seed = derive_seed(c.seed, kSplitStream);
    if (kind == PlanKind::KFold) return plan_kfold(ids, c.split.kfold_k, c.split.test_fraction, seed);
    return plan_loo(ids, seed);
}

ojson metrics_json(const MetricReport& m) {
    return ojson{{"mae", m.mae}, {"mse", m.mse}, {"rmse", m.rmse},
                 {"r2", std::isfinite(m.r2) ? ojson(m.r2) : ojson(nullptr)}, {"dev", m.dev}};
}

}  // namespace

void run_gen(const PipelineConfig& c, const fs::path& dir, std::ostream& log) {
    const Stopwatch sw;
    const auto catalog = build_catalog(c.catalog, c.seed);
    const auto grid = temperature_grid(c.grid.t_min, c.grid.t_max, c.grid.raw_step);
    const auto raw = sweep(catalog, grid, c.transmission);
    write_file(dir / "catalog.json", catalog_to_json(catalog));
    write_file(dir / "raw_curves.csv", raw_curves_to_csv(raw));
    log << "gen: " << catalog.size() << " systems, " << raw.size() << " raw rows (" << secs(sw.seconds()) << ")\n";
}

void run_augment(const PipelineConfig& c, const fs::path& dir, std::ostream& log) {
    const Stopwatch sw;
    const auto catalog = catalog_from_json(read_file(dir / "catalog.json"));
    const auto raw = raw_curves_from_csv(read_file(dir / "raw_curves.csv"));
    const auto fits = fit_curves(raw, c.grid.fit_window.lo, c.grid.fit_window.hi);
    write_file(dir / "fits.csv", fits_to_csv(fits));

    std::vector<DenseRow> dense;
    if (c.dataset_mode == DatasetMode::Arrhenius) {
        std::vector<std::string> ids;
        for (const auto& s : catalog) ids.push_back(s.id);
        dense = augment(fits, ids, c.grid.t_min, c.grid.t_max, c.grid.augment_step);
    } else {
        dense = direct_curves(catalog, c.grid.t_min, c.grid.t_max, c.grid.augment_step, c.transmission);
    }
    const auto records = assemble(dense, catalog);
    for (const auto& r : records) {
        require(r.T >= c.grid.t_min - 1e-9 && r.T <= c.grid.t_max + 1e-9, ErrorKind::Data,
                "record " + r.system_id + " at " + format_double(r.T) + " K lies outside the grid");
    }
    write_file(dir / "dataset.csv", dataset_to_csv(records));
    double worst = 0.0;
    for (const auto& [key, fit] : fits) worst = std::max(worst, fit.residual_rmse);
    log << "augment: " << fits.size() << " fits (max residual " << format_double(std::round(worst * 1e4) / 1e4)
        << " log10), " << records.size() << " records, mode " << to_string(c.dataset_mode) << " ("
        << secs(sw.seconds()) << ")\n";
}

void run_train(const PipelineConfig& c, const fs::path& dir, Family family, PlanKind kind, int plan_index,
               std::ostream& log) {
    const Stopwatch sw;
    const auto records = load_dataset(dir);
    const auto plans = plans_of(c, records, kind);
    require(plan_index >= 0 && plan_index < static_cast<int>(plans.size()), ErrorKind::Usage,
            "plan index " + std::to_string(plan_index) + " out of range (" + std::to_string(plans.size()) + " plans)");
    const auto& plan = plans[static_cast<std::size_t>(plan_index)];
    const auto tr = plan.rows(Role::Train), va = plan.rows(Role::Validation), te = plan.rows(Role::Test);
    const auto x_tr = features_of(records, tr), x_va = features_of(records, va), x_te = features_of(records, te);
    const auto y_tr = targets_of(records, tr), y_va = targets_of(records, va), y_te = targets_of(records, te);

    const auto found = search_family(family, c.space_for(family), x_tr, y_tr, x_va, y_va, c.model.search_budget,
                                     c.model.strategy, derive_seed(c.seed, kTrainStream));
    const auto train_m = metrics(y_tr, predict(found.best_model, x_tr));
    const auto test_m = metrics(y_te, predict(found.best_model, x_te));

    write_file(dir / "model.json", serialize(found.best_model));
    write_file(dir / "trial_log.csv", trial_log_to_csv(family, found.result.trials));
    ojson report;
    report["family"] = std::string(to_string(family));
    report["plan_id"] = plan.id;
    report["n_train"] = tr.size();
    report["n_validation"] = va.size();
    report["n_test"] = te.size();
    report["best_trial"] = found.result.best_trial;
    report["val_rmse"] = found.result.best_rmse;
    report["best_params"] = ojson::parse(params_to_json(found.result.best_params));
    report["train"] = metrics_json(train_m);
    report["test"] = metrics_json(test_m);
    write_file(dir / "train_report.json", report.dump(2) + "\n");
    log << "train: " << to_string(family) << " on " << plan.id << ", test rmse " << format_double(test_m.rmse)
        << ", r2 " << format_double(test_m.r2) << " (" << secs(sw.seconds()) << ")\n";
}

void run_benchmark(const PipelineConfig& c, const fs::path& dir, std::ostream& log) {
    const Stopwatch sw;
    const auto records = load_dataset(dir);
    auto plans = plans_of(c, records, PlanKind::KFold);
    if (c.split.loo) {
        auto loo = plans_of(c, records, PlanKind::LeaveOneSystemOut);
        plans.insert(plans.end(), loo.begin(), loo.end());
    }
    BenchmarkOptions opt;
    opt.families = c.model.families;
    opt.budget = c.model.search_budget;
    opt.strategy = c.model.strategy;
    for (Family f : c.model.families) opt.spaces[f] = c.space_for(f);
    opt.seed = derive_seed(c.seed, kBenchStream);

    std::size_t done = 0;
    const std::size_t total = plans.size() * opt.families.size();
    const auto report = benchmark(records, plans, opt, [&](const BenchmarkCell& cell) {
        ++done;
        log << "benchmark [" << done << "/" << total << "] " << cell.plan_id << " " << to_string(cell.family)
            << " test rmse " << format_double(std::round(cell.test.rmse * 1e4) / 1e4) << " (" << secs(sw.seconds())
            << ")\n";
        log.flush();
    });
    write_file(dir / "bench.json", bench_to_json(report));
    write_file(dir / "deviations.csv", deviations_to_csv(report));
    write_file(dir / "benchmark_trials.csv", benchmark_trials_to_csv(report));
    for (const auto& [kind, fams] : summarize(report)) {
        for (const auto& [family, s] : fams) {
            log << "benchmark summary " << to_string(kind) << " " << to_string(family) << ": mean test rmse "
                << format_double(std::round(s.test_rmse_mean * 1e4) / 1e4) << ", mean test r2 "
                << format_double(std::round(s.test_r2_mean * 1e5) / 1e5) << "\n";
        }
    }
    log << "benchmark: " << total << " cells (" << secs(sw.seconds()) << ")\n";
}

void run_explain(const PipelineConfig& c, const fs::path& dir, const fs::path& model_path, std::ostream& log) {
    const Stopwatch sw;
    const auto model = deserialize(read_file(model_path));
    check_schema(model);
    const auto records = load_dataset(dir);
    const auto plans = plans_of(c, records, PlanKind::KFold);
    const auto train_rows = plans.front().rows(Role::Train);
    const auto test_rows = plans.front().rows(Role::Test);

    const std::uint64_t seed = derive_seed(c.seed, kExplainStream);
    std::vector<std::size_t> bg_rows, ex_rows;
    for (auto i : sample_rows(train_rows.size(), c.explain.background, derive_seed(seed, 0))) bg_rows.push_back(train_rows[i]);
    for (auto i : sample_rows(test_rows.size(), c.explain.n_rows, derive_seed(seed, 1))) ex_rows.push_back(test_rows[i]);

    const auto report = shapley_exact(model, features_of(records, ex_rows), features_of(records, bg_rows));
    write_file(dir / "shap.csv", shap_to_csv(report, ex_rows));

    Attribution mean_abs{};
    for (const auto& phi : report.phi) {
        for (std::size_t j = 0; j < kNumFeatures; ++j) mean_abs[j] += std::abs(phi[j]) / static_cast<double>(report.phi.size());
    }
    std::array<std::size_t, kNumFeatures> rank{};
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        for (std::size_t k = 0; k < kNumFeatures; ++k) rank[j] += mean_abs[k] > mean_abs[j] ? 1 : 0;
    }
    ojson imp;
    imp["family"] = std::string(to_string(model.family));
    imp["base_value"] = report.base_value;
    imp["background_size"] = report.background_size;
    ojson features = ojson::array();
    const bool trees = is_tree_family(model.family);
    const Attribution gain = trees ? gain_importance(model) : Attribution{};
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        ojson f{{"feature", std::string(kFeatureNames[j])}, {"mean_abs_shap", mean_abs[j]}, {"shap_rank", rank[j] + 1}};
        if (trees) f["gain_importance"] = gain[j];
        features.push_back(std::move(f));
    }
    imp["features"] = std::move(features);
    write_file(dir / "importance.json", imp.dump(2) + "\n");
    log << "explain: " << report.phi.size() << " rows against " << report.background_size
        << " background rows; KIE mean |shap| rank " << rank[0] + 1 << " of 4 (" << secs(sw.seconds()) << ")\n";
}

void run_phase(const PipelineConfig& c, const fs::path& dir, std::ostream& log) {
    const Stopwatch sw;
    const auto records = load_dataset(dir);
    const auto panels = build_diagram(records, c.phase.panel_temperatures, c.phase.thresholds);
    write_file(dir / "phase.csv", phase_to_csv(panels));
    write_file(dir / "phase_summary.json", phase_summary_json(panels));
    const auto svgs = render_svg(panels, c.phase.thresholds);
    for (std::size_t i = 0; i < panels.size(); ++i) {
        write_file(dir / ("phase_" + format_double(panels[i].T) + ".svg"), svgs[i]);
    }
    std::size_t anomalies = 0;
    for (const auto& p : panels) anomalies += p.anomaly_count();
    log << "phase: " << panels.size() << " panels, " << anomalies << " anomaly points (" << secs(sw.seconds())
        << ")\n";
}

int run_validate_physics(const PipelineConfig& c, std::ostream& log) {
    const auto checks = run_physics_oracles(c);
    int failed = 0;
    for (const auto& ch : checks) {
        log << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
        failed += ch.passed ? 0 : 1;
    }
    log << "validate-physics: " << checks.size() - static_cast<std::size_t>(failed) << "/" << checks.size()
        << " passed\n";
    return failed;
}

void run_pipeline(const PipelineConfig& c, const fs::path& dir, std::ostream& log) {
    run_gen(c, dir, log);
    run_augment(c, dir, log);
    run_phase(c, dir, log);
    run_train(c, dir, c.model.train_family, PlanKind::KFold, 0, log);
    run_explain(c, dir, dir / "model.json", log);
    run_benchmark(c, dir, log);
}

}  // namespace tunnelkit
