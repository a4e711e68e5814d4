#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tunnelkit/dataset.hpp"
#include "tunnelkit/models.hpp"
#include "tunnelkit/search.hpp"

namespace tunnelkit {

struct MetricReport {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;  // NaN when y_obs has zero variance
    double dev = 0.0;
};

// Dev = 10^rmse - 1, the mean multiplicative error on a log10 target.
double deviation(double rmse);

// MAE, MSE, RMSE, R^2 = 1 - SSR/SST and Dev. Throws Metric on empty or
// unequal inputs. Zero-variance y_obs leaves r2 as NaN (see r_squared).
MetricReport metrics(std::span<const double> y_obs, std::span<const double> y_pred);

// Throws Metric when y_obs has zero variance.
double r_squared(std::span<const double> y_obs, std::span<const double> y_pred);

enum class PlanKind { KFold, LeaveOneSystemOut };
std::string_view to_string(PlanKind kind) noexcept;

enum class Role : std::uint8_t { Train, Validation, Test };

struct SplitPlan {
    PlanKind kind = PlanKind::KFold;
    std::string id;     // "kfold_03", "loo_glu_nh2"
    std::string group;  // fold number or held-out system
    std::vector<Role> roles;

    std::vector<std::size_t> rows(Role role) const;
};

// Seeded shuffle within each system; a test share is held out first, then the
// rest is dealt into k validation folds. Every system contributes to test and
// to each fold in proportion to its size.
std::vector<SplitPlan> plan_kfold(std::span<const std::string> system_ids, int k, double test_fraction,
                                  std::uint64_t seed);

// One plan per system (sorted by id): the system is the test set, and the
// other rows are split 19:1 into train and validation, stratified by system.
std::vector<SplitPlan> plan_loo(std::span<const std::string> system_ids, std::uint64_t seed);

std::vector<std::string> system_ids_of(const std::vector<DatasetRecord>& records);
FeatureMatrix features_of(const std::vector<DatasetRecord>& records);
FeatureMatrix features_of(const std::vector<DatasetRecord>& records, std::span<const std::size_t> rows);
std::vector<double> targets_of(const std::vector<DatasetRecord>& records, std::span<const std::size_t> rows);

struct BenchmarkOptions {
    std::vector<Family> families;
    int budget = 10;
    SearchStrategy strategy = SearchStrategy::TPE;
    std::map<Family, HyperSpace> spaces;  // families missing here use default_space()
    std::uint64_t seed = 0;
};

struct BenchmarkCell {
    Family family = Family::Ridge;
    PlanKind kind = PlanKind::KFold;
    std::string plan_id;
    std::size_t n_train = 0, n_validation = 0, n_test = 0;
    SearchResult search;
    MetricReport train;
    MetricReport test;
};

struct BenchmarkReport {
    BenchmarkOptions options;
    std::vector<BenchmarkCell> cells;  // ordered by (plan, family)
};

struct FamilySummary {
    std::size_t n_plans = 0;
    double test_rmse_mean = 0.0, test_rmse_std = 0.0;
    double test_r2_mean = 0.0, train_r2_mean = 0.0;
    double delta_r2_mean = 0.0;  // train R^2 - test R^2
    double test_dev_mean = 0.0;
};

// Per plan kind, per family.
std::map<PlanKind, std::map<Family, FamilySummary>> summarize(const BenchmarkReport& report);

using CellCallback = std::function<void(const BenchmarkCell&)>;

// Every (family, plan) cell runs search_family on its train/validation rows
// and scores the selected model on train and test. Cells may run concurrently;
// the report is assembled in (plan, family) order.
BenchmarkReport benchmark(const std::vector<DatasetRecord>& records, const std::vector<SplitPlan>& plans,
                          const BenchmarkOptions& options, const CellCallback& on_cell = {});

std::string bench_to_json(const BenchmarkReport& report);

// family,plan_kind,plan_id,test_rmse,test_dev
std::string deviations_to_csv(const BenchmarkReport& report);

// plan_id,trial,family,params_json,val_rmse
std::string benchmark_trials_to_csv(const BenchmarkReport& report);

}  // namespace tunnelkit
