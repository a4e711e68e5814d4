#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelkit/tree.hpp"

namespace tunnelkit {

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{"log10_kie", "T_K", "log10_k_tun", "eta"};

// Serialized model documents carry this tag; any 1.x document loads.
inline constexpr std::string_view kModelFormatVersion = "1.0";

enum class Family { Ridge, PLSR, ExtraTrees, RandomForest, GBDT, XGB };

inline constexpr std::array<Family, 6> kAllFamilies{Family::Ridge,        Family::PLSR, Family::ExtraTrees,
                                                    Family::RandomForest, Family::GBDT, Family::XGB};

std::string_view to_string(Family family) noexcept;
Family family_from_string(std::string_view name);  // throws Specification
bool is_tree_family(Family family) noexcept;

// Integer-valued parameters are stored as doubles and rounded on use.
using Hyperparameters = std::map<std::string, double>;

// Defaults for every parameter a family reads; fit() rejects unknown names.
Hyperparameters default_hyperparameters(Family family);

struct LinearPayload {
    std::array<double, kNumFeatures> means{};
    std::array<double, kNumFeatures> scales{};
    std::array<double, kNumFeatures> coefficients{};  // on z-scored features
    double intercept = 0.0;
};

struct EnsemblePayload {
    double base_score = 0.0;
    double shrinkage = 1.0;  // boosted: prediction = base + shrinkage * sum; forests: mean of trees
    bool average = false;
    std::vector<Tree> trees;
};

struct TrainedModel {
    Family family = Family::Ridge;
    Hyperparameters hyperparameters;
    std::vector<std::string> features{kFeatureNames.begin(), kFeatureNames.end()};
    LinearPayload linear;
    EnsemblePayload ensemble;

    // Coefficients in raw feature units (linear families only).
    std::array<double, kNumFeatures> raw_coefficients() const;
};

struct ValidationSet {
    const FeatureMatrix* x = nullptr;
    std::span<const double> y;
};

// Boosted families stop after 50 rounds without validation improvement and
// keep the best round count when a validation set is given.
TrainedModel fit(Family family, const Hyperparameters& hyperparameters, const FeatureMatrix& x,
                 std::span<const double> y, std::uint64_t seed, std::optional<ValidationSet> validation = {});

std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& x);
double predict_row(const TrainedModel& model, std::span<const double> row);

// Boosted families only: training-set predictions after each round, used to
// check that the loss never rises.
std::vector<std::vector<double>> staged_predict(const TrainedModel& model, const FeatureMatrix& x);

std::string serialize(const TrainedModel& model);
TrainedModel deserialize(std::string_view document);

// Throws Consistency unless the model was trained on the fixed feature order.
void check_schema(const TrainedModel& model);

}  // namespace tunnelkit
