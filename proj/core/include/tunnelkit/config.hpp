#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tunnelkit/dataset.hpp"
#include "tunnelkit/eval.hpp"
#include "tunnelkit/models.hpp"
#include "tunnelkit/phase.hpp"
#include "tunnelkit/physics.hpp"
#include "tunnelkit/search.hpp"

namespace tunnelkit {

struct GridConfig {
    double t_min = 50.0;
    double t_max = 1000.0;
    double raw_step = 50.0;
    double augment_step = 1.0;
    Range fit_window{300.0, 1000.0};
};

struct ModelConfig {
    std::vector<Family> families{kAllFamilies.begin(), kAllFamilies.end()};
    int search_budget = 10;
    SearchStrategy strategy = SearchStrategy::TPE;
    std::map<Family, HyperSpace> spaces;  // overrides of default_space()
    Family train_family = Family::XGB;    // model written by `train` and used by `explain`
};

struct SplitConfig {
    int kfold_k = 10;
    double test_fraction = 0.10;
    bool loo = true;
};

struct ExplainConfig {
    std::size_t n_rows = 100;
    std::size_t background = 256;
};

struct PhaseConfig {
    std::vector<double> panel_temperatures{100, 200, 300, 400, 500, 600, 700, 800};
    RegimeThresholds thresholds;
};

struct PipelineConfig {
    std::uint64_t seed = 20240501;
    std::string output_dir = "out";
    TransmissionMode transmission = TransmissionMode::Exact;
    CatalogConfig catalog;
    GridConfig grid;
    DatasetMode dataset_mode = DatasetMode::Direct;
    ModelConfig model;
    SplitConfig split;
    ExplainConfig explain;
    PhaseConfig phase;

    HyperSpace space_for(Family family) const;

    // Cross-field checks; throws Specification.
    void validate() const;
};

// Parses and validates. Unknown keys anywhere are rejected; missing keys keep
// their defaults. Throws Specification on any schema violation.
PipelineConfig parse_config(std::string_view text);

// Throws Usage when the file cannot be read.
PipelineConfig load_config(const std::filesystem::path& path);

// Full document with every key spelled out.
std::string config_to_json(const PipelineConfig& config);

}  // namespace tunnelkit
