#include "tunnelkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>

#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

double deviation(double rmse) { return std::pow(10.0, rmse) - 1.0; }

namespace {

void check_pair(std::span<const double> y_obs, std::span<const double> y_pred) {
    require(!y_obs.empty(), ErrorKind::Metric, "metrics need at least one observation");
    require(y_obs.size() == y_pred.size(), ErrorKind::Metric, "observed and predicted lengths differ");
}

// SSR and SST, NaN for R^2 when SST is zero.
double r2_or_nan(std::span<const double> y_obs, std::span<const double> y_pred) {
    const double mean = std::accumulate(y_obs.begin(), y_obs.end(), 0.0) / static_cast<double>(y_obs.size());
    double ssr = 0.0, sst = 0.0;
    for (std::size_t i = 0; i < y_obs.size(); ++i) {
        ssr += (y_obs[i] - y_pred[i]) * (y_obs[i] - y_pred[i]);
        sst += (y_obs[i] - mean) * (y_obs[i] - mean);
    }
    if (!(sst > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 - ssr / sst;
}

}  // namespace

MetricReport metrics(std::span<const double> y_obs, std::span<const double> y_pred) {
    check_pair(y_obs, y_pred);
    MetricReport r;
    const auto n = static_cast<double>(y_obs.size());
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < y_obs.size(); ++i) {
        const double e = y_obs[i] - y_pred[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
    }
    r.mae = abs_sum / n;
    r.mse = sq_sum / n;
    r.rmse = std::sqrt(r.mse);
    r.r2 = r2_or_nan(y_obs, y_pred);
    r.dev = deviation(r.rmse);
    return r;
}

double r_squared(std::span<const double> y_obs, std::span<const double> y_pred) {
    check_pair(y_obs, y_pred);
    const double r2 = r2_or_nan(y_obs, y_pred);
    require(!std::isnan(r2), ErrorKind::Metric, "R^2 is undefined for zero-variance observations");
    return r2;
}

std::string_view to_string(PlanKind kind) noexcept { return kind == PlanKind::KFold ? "kfold" : "loo"; }

std::vector<std::size_t> SplitPlan::rows(Role role) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < roles.size(); ++i) {
        if (roles[i] == role) out.push_back(i);
    }
    return out;
}

namespace {

std::vector<std::string> sorted_unique(std::span<const std::string> ids) {
    std::vector<std::string> out(ids.begin(), ids.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Rows of the given subset, shuffled per system and interleaved so that any
// prefix holds each system in proportion to its size.
std::vector<std::size_t> stratified_order(std::span<const std::string> ids, std::span<const std::size_t> subset,
                                          std::uint64_t seed) {
    const auto systems = sorted_unique(ids);
    std::vector<std::vector<std::size_t>> per_system(systems.size());
    for (auto i : subset) {
        const auto s = static_cast<std::size_t>(std::lower_bound(systems.begin(), systems.end(), ids[i]) -
                                                systems.begin());
        per_system[s].push_back(i);
    }
    struct Keyed {
        double key;
        std::size_t system;
        std::size_t row;
    };
    std::vector<Keyed> keyed;
    keyed.reserve(subset.size());
    for (std::size_t s = 0; s < per_system.size(); ++s) {
        auto& rows = per_system[s];
        Rng rng(derive_seed(seed, s));
        rng.shuffle(std::span<std::size_t>(rows));
        const auto n = static_cast<double>(rows.size());
        for (std::size_t p = 0; p < rows.size(); ++p) {
            keyed.push_back({(static_cast<double>(p) + 0.5) / n, s, rows[p]});
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return a.key != b.key ? a.key < b.key : a.system < b.system;
    });
    std::vector<std::size_t> out;
    out.reserve(keyed.size());
    for (const auto& k : keyed) out.push_back(k.row);
    return out;
}

std::string two_digits(int i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", i);
    return buf;
}

}  // namespace

std::vector<SplitPlan> plan_kfold(std::span<const std::string> system_ids, int k, double test_fraction,
                                  std::uint64_t seed) {
    require(k >= 2, ErrorKind::Specification, "k-fold needs k >= 2");
    require(test_fraction >= 0.0 && test_fraction < 1.0, ErrorKind::Specification, "test_fraction must be in [0, 1)");
    const std::size_t n = system_ids.size();
    const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    require(n >= n_test + static_cast<std::size_t>(k), ErrorKind::Specification,
            "fewer rows than folds: " + std::to_string(n) + " rows for k = " + std::to_string(k));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto order = stratified_order(system_ids, all, seed);

    // Folds are contiguous blocks of the interleaved order, so each holds every
    // system in proportion. Striding by k would alias with the interleave.
    std::vector<int> fold_of(n, -1);
    const std::size_t n_rest = n - n_test;
    for (std::size_t r = n_test; r < n; ++r) {
        fold_of[order[r]] = static_cast<int>((r - n_test) * static_cast<std::size_t>(k) / n_rest);
    }

    std::vector<SplitPlan> plans;
    for (int f = 0; f < k; ++f) {
        SplitPlan p;
        p.kind = PlanKind::KFold;
        p.id = "kfold_" + two_digits(f);
        p.group = std::to_string(f);
        p.roles.assign(n, Role::Train);
        for (std::size_t i = 0; i < n; ++i) {
            if (fold_of[i] < 0) {
                p.roles[i] = Role::Test;
            } else if (fold_of[i] == f) {
                p.roles[i] = Role::Validation;
            }
        }
        plans.push_back(std::move(p));
    }
    return plans;
}

std::vector<SplitPlan> plan_loo(std::span<const std::string> system_ids, std::uint64_t seed) {
    const auto systems = sorted_unique(system_ids);
    require(systems.size() >= 2, ErrorKind::Specification, "leave-one-system-out needs at least two systems");
    const std::size_t n = system_ids.size();
    std::vector<SplitPlan> plans;
    for (std::size_t s = 0; s < systems.size(); ++s) {
        SplitPlan p;
        p.kind = PlanKind::LeaveOneSystemOut;
        p.id = "loo_" + systems[s];
        p.group = systems[s];
        p.roles.assign(n, Role::Train);
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
            if (system_ids[i] == systems[s]) {
                p.roles[i] = Role::Test;
            } else {
                rest.push_back(i);
            }
        }
        const auto order = stratified_order(system_ids, rest, derive_seed(seed, s));
        const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(rest.size()) / 20.0));
        require(n_val >= 1 && n_val < rest.size(), ErrorKind::Specification,
                "too few rows to carve a validation set for " + p.id);
        for (std::size_t r = 0; r < n_val; ++r) p.roles[order[r]] = Role::Validation;
        plans.push_back(std::move(p));
    }
    return plans;
}

std::vector<std::string> system_ids_of(const std::vector<DatasetRecord>& records) {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.system_id);
    return out;
}

FeatureMatrix features_of(const std::vector<DatasetRecord>& records) {
    std::vector<std::size_t> rows(records.size());
    std::iota(rows.begin(), rows.end(), 0);
    return features_of(records, rows);
}

FeatureMatrix features_of(const std::vector<DatasetRecord>& records, std::span<const std::size_t> rows) {
    FeatureMatrix x(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = records[rows[i]];
        x(i, 0) = r.log10_kie;
        x(i, 1) = r.T;
        x(i, 2) = r.log10_k_tun;
        x(i, 3) = r.eta;
    }
    return x;
}

std::vector<double> targets_of(const std::vector<DatasetRecord>& records, std::span<const std::size_t> rows) {
    std::vector<double> y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = records[rows[i]].log10_kappa;
    return y;
}

BenchmarkReport benchmark(const std::vector<DatasetRecord>& records, const std::vector<SplitPlan>& plans,
                          const BenchmarkOptions& options, const CellCallback& on_cell) {
    require(!options.families.empty(), ErrorKind::Specification, "benchmark needs at least one family");
    require(!plans.empty(), ErrorKind::Specification, "benchmark needs at least one split plan");
    for (const auto& p : plans) {
        require(p.roles.size() == records.size(), ErrorKind::Consistency,
                "split plan " + p.id + " does not cover the dataset");
    }
    BenchmarkReport report;
    report.options = options;
    const std::size_t n_fam = options.families.size();
    report.cells.resize(plans.size() * n_fam);
    std::mutex callback_mutex;

    parallel_for(report.cells.size(), [&](std::size_t c) {
        const auto& plan = plans[c / n_fam];
        const Family family = options.families[c % n_fam];
        const auto train_rows = plan.rows(Role::Train);
        const auto val_rows = plan.rows(Role::Validation);
        const auto test_rows = plan.rows(Role::Test);
        const auto x_train = features_of(records, train_rows);
        const auto y_train = targets_of(records, train_rows);
        const auto x_val = features_of(records, val_rows);
        const auto y_val = targets_of(records, val_rows);
        const auto x_test = features_of(records, test_rows);
        const auto y_test = targets_of(records, test_rows);

        const auto it = options.spaces.find(family);
        const HyperSpace space = it != options.spaces.end() ? it->second : default_space(family);
        auto found = search_family(family, space, x_train, y_train, x_val, y_val, options.budget, options.strategy,
                                   derive_seed(options.seed, c));

        BenchmarkCell& cell = report.cells[c];
        cell.family = family;
        cell.kind = plan.kind;
        cell.plan_id = plan.id;
        cell.n_train = train_rows.size();
        cell.n_validation = val_rows.size();
        cell.n_test = test_rows.size();
        cell.train = metrics(y_train, predict(found.best_model, x_train));
        cell.test = metrics(y_test, predict(found.best_model, x_test));
        cell.search = std::move(found.result);
        if (on_cell) {
            std::lock_guard lock(callback_mutex);
            on_cell(cell);
        }
    });
    return report;
}

std::map<PlanKind, std::map<Family, FamilySummary>> summarize(const BenchmarkReport& report) {
    std::map<PlanKind, std::map<Family, std::vector<const BenchmarkCell*>>> groups;
    for (const auto& c : report.cells) groups[c.kind][c.family].push_back(&c);
    std::map<PlanKind, std::map<Family, FamilySummary>> out;
    for (const auto& [kind, fams] : groups) {
        for (const auto& [family, cells] : fams) {
            FamilySummary s;
            s.n_plans = cells.size();
            const auto n = static_cast<double>(cells.size());
            for (const auto* c : cells) {
                s.test_rmse_mean += c->test.rmse / n;
                s.test_r2_mean += c->test.r2 / n;
                s.train_r2_mean += c->train.r2 / n;
                s.test_dev_mean += c->test.dev / n;
            }
            s.delta_r2_mean = s.train_r2_mean - s.test_r2_mean;
            if (cells.size() > 1) {
                double ss = 0.0;
                for (const auto* c : cells) ss += (c->test.rmse - s.test_rmse_mean) * (c->test.rmse - s.test_rmse_mean);
                s.test_rmse_std = std::sqrt(ss / (n - 1.0));
            }
            out[kind][family] = s;
        }
    }
    return out;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson number_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson metrics_json(const MetricReport& m) {
    return ojson{{"mae", m.mae},
                 {"mse", m.mse},
                 {"rmse", m.rmse},
                 {"r2", number_or_null(m.r2)},
                 {"dev", m.dev}};
}

}  // namespace

std::string bench_to_json(const BenchmarkReport& report) {
    ojson doc;
    doc["seed"] = report.options.seed;
    doc["strategy"] = std::string(to_string(report.options.strategy));
    doc["budget"] = report.options.budget;
    ojson cells = ojson::array();
    for (const auto& c : report.cells) {
        std::size_t failed = 0;
        for (const auto& t : c.search.trials) failed += std::isfinite(t.val_rmse) ? 0 : 1;
        ojson cell;
        cell["family"] = std::string(to_string(c.family));
        cell["plan_kind"] = std::string(to_string(c.kind));
        cell["plan_id"] = c.plan_id;
        cell["n_train"] = c.n_train;
        cell["n_validation"] = c.n_validation;
        cell["n_test"] = c.n_test;
        cell["n_trials"] = c.search.trials.size();
        cell["n_failed_trials"] = failed;
        cell["best_trial"] = c.search.best_trial;
        cell["val_rmse"] = c.search.best_rmse;
        cell["best_params"] = ojson::parse(params_to_json(c.search.best_params));
        cell["train"] = metrics_json(c.train);
        cell["test"] = metrics_json(c.test);
        cells.push_back(std::move(cell));
    }
    doc["cells"] = std::move(cells);
    ojson summary = ojson::object();
    for (const auto& [kind, fams] : summarize(report)) {
        ojson k = ojson::object();
        for (const auto& [family, s] : fams) {
            k[std::string(to_string(family))] = ojson{{"n_plans", s.n_plans},
                                                      {"test_rmse_mean", s.test_rmse_mean},
                                                      {"test_rmse_std", s.test_rmse_std},
                                                      {"test_r2_mean", number_or_null(s.test_r2_mean)},
                                                      {"train_r2_mean", number_or_null(s.train_r2_mean)},
                                                      {"delta_r2_mean", number_or_null(s.delta_r2_mean)},
                                                      {"test_dev_mean", s.test_dev_mean}};
        }
        summary[std::string(to_string(kind))] = std::move(k);
    }
    doc["summary"] = std::move(summary);
    return doc.dump(2) + "\n";
}

std::string deviations_to_csv(const BenchmarkReport& report) {
    static constexpr std::string_view header[] = {"family", "plan_kind", "plan_id", "test_rmse", "test_dev"};
    CsvWriter w(header);
    for (const auto& c : report.cells) {
        w.field(to_string(c.family)).field(to_string(c.kind)).field(c.plan_id).field(c.test.rmse).field(c.test.dev);
        w.end_row();
    }
    return w.str();
}

std::string benchmark_trials_to_csv(const BenchmarkReport& report) {
    static constexpr std::string_view header[] = {"plan_id", "trial", "family", "params_json", "val_rmse"};
    CsvWriter w(header);
    for (const auto& c : report.cells) {
        for (const auto& t : c.search.trials) {
            w.field(c.plan_id)
                .field(static_cast<long long>(t.index))
                .field(to_string(c.family))
                .field(quote_field(params_to_json(t.params)))
                .field(t.val_rmse);
            w.end_row();
        }
    }
    return w.str();
}

}  // namespace tunnelkit
