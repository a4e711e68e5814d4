#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tunnelkit/models.hpp"

namespace tunnelkit {

using Attribution = std::array<double, kNumFeatures>;

struct ShapReport {
    double base_value = 0.0;  // v(empty set): mean prediction over the background
    std::vector<Attribution> phi;
    std::vector<double> predictions;
    std::size_t background_size = 0;
};

// Up to n rows drawn without replacement, kept in their original order.
std::vector<std::size_t> sample_rows(std::size_t population, std::size_t n, std::uint64_t seed);

// Interventional Shapley values by enumerating all 2^4 coalitions. v(S) is
// the background mean of predictions with the features in S taken from the
// explained row and the rest from the background row. v(F) is averaged the same
// way, so it equals the prediction up to rounding.
ShapReport shapley_exact(const TrainedModel& model, const FeatureMatrix& rows, const FeatureMatrix& background);

// Squared-error reduction summed per split feature over all trees, normalized
// to sum to 1 (all zeros for an ensemble without splits). Throws Capability for
// linear families.
Attribution gain_importance(const TrainedModel& model);

// row,base_value,phi_log10_kie,phi_T,phi_log10_k_tun,phi_eta,prediction
std::string shap_to_csv(const ShapReport& report, const std::vector<std::size_t>& row_ids);

}  // namespace tunnelkit
