#pragma once

#include <filesystem>
#include <ostream>

#include "tunnelkit/config.hpp"
#include "tunnelkit/eval.hpp"
#include "tunnelkit/models.hpp"

namespace tunnelkit {

namespace fs = std::filesystem;

// Each command reads its inputs from `dir` and writes its artifacts there.
// Progress goes to `log`.

// catalog.json, raw_curves.csv
void run_gen(const PipelineConfig& config, const fs::path& dir, std::ostream& log);

// fits.csv, dataset.csv (needs catalog.json, raw_curves.csv)
void run_augment(const PipelineConfig& config, const fs::path& dir, std::ostream& log);

// model.json, trial_log.csv, train_report.json (needs dataset.csv)
void run_train(const PipelineConfig& config, const fs::path& dir, Family family, PlanKind plan, int plan_index,
               std::ostream& log);

// bench.json, deviations.csv, benchmark_trials.csv (needs dataset.csv)
void run_benchmark(const PipelineConfig& config, const fs::path& dir, std::ostream& log);

// shap.csv, importance.json (needs dataset.csv). Rows come from the test set
// and the background from the training set of the first k-fold plan.
void run_explain(const PipelineConfig& config, const fs::path& dir, const fs::path& model_path, std::ostream& log);

// phase.csv, phase_summary.json, phase_<T>.svg (needs dataset.csv)
void run_phase(const PipelineConfig& config, const fs::path& dir, std::ostream& log);

// Prints one line per oracle; returns the number of failed checks.
int run_validate_physics(const PipelineConfig& config, std::ostream& log);

// gen, augment, phase, train (k-fold plan 0), explain, benchmark.
void run_pipeline(const PipelineConfig& config, const fs::path& dir, std::ostream& log);

}  // namespace tunnelkit
