#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelkit/models.hpp"

namespace tunnelkit {

enum class ParamScale { Linear, Log, Integer };

std::string_view to_string(ParamScale scale) noexcept;
ParamScale param_scale_from_string(std::string_view name);

struct ParamRange {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    ParamScale scale = ParamScale::Linear;
};

struct HyperSpace {
    std::vector<ParamRange> params;

    // Throws Specification on lo >= hi, non-positive log bounds or duplicates.
    void validate() const;
};

HyperSpace default_space(Family family);

enum class SearchStrategy { Random, TPE };

std::string_view to_string(SearchStrategy strategy) noexcept;
SearchStrategy search_strategy_from_string(std::string_view name);

struct TpeOptions {
    int n_startup = 10;
    double gamma = 0.25;
    int n_candidates = 24;
};

struct Trial {
    int index = 0;
    Hyperparameters params;
    double val_rmse = 0.0;  // NaN when the trial failed
    std::string error;
};

struct SearchResult {
    int best_trial = -1;
    Hyperparameters best_params;
    double best_rmse = 0.0;
    std::vector<Trial> trials;  // ordered by index
};

// Returns the validation loss of one parameter set; throwing marks the trial
// failed. May be called concurrently for the random strategy.
using Objective = std::function<double(int trial_index, const Hyperparameters&)>;

// Minimizes the objective. Random draws are uniform (log-uniform for Log
// ranges, rounded for Integer). TPE starts with n_startup random trials, then
// splits trials at the gamma quantile of loss, fits per-parameter Parzen
// mixtures to the good and bad sets and takes the candidate with the largest
// l(x)/g(x). Ties go to the earliest trial. Throws Training if every trial fails.
SearchResult search(const HyperSpace& space, const Objective& objective, int budget, SearchStrategy strategy,
                    std::uint64_t seed, const TpeOptions& tpe = {});

struct FamilySearch {
    SearchResult result;
    TrainedModel best_model;
};

// Fits on train (early stopping on validation for boosted families) and scores
// RMSE on validation. Every trial uses the same fit seed, so best_model is the
// final fit for best_params.
FamilySearch search_family(Family family, const HyperSpace& space, const FeatureMatrix& x_train,
                           std::span<const double> y_train, const FeatureMatrix& x_val, std::span<const double> y_val,
                           int budget, SearchStrategy strategy, std::uint64_t seed);

std::string params_to_json(const Hyperparameters& params);

// trial,family,params_json,val_rmse
std::string trial_log_to_csv(Family family, const std::vector<Trial>& trials);

}  // namespace tunnelkit
