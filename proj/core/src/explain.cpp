#include "tunnelkit/explain.hpp"

#include <algorithm>
#include <numeric>

#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

namespace {

constexpr std::size_t kCoalitions = std::size_t{1} << kNumFeatures;

// |S|! (n - |S| - 1)! / n! for n = 4
constexpr double kWeight[kNumFeatures] = {1.0 / 4.0, 1.0 / 12.0, 1.0 / 12.0, 1.0 / 4.0};

int popcount(std::size_t mask) {
    int c = 0;
    for (; mask; mask &= mask - 1) ++c;
    return c;
}

}  // namespace

std::vector<std::size_t> sample_rows(std::size_t population, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> idx(population);
    std::iota(idx.begin(), idx.end(), 0);
    if (n >= population) return idx;
    Rng rng(seed);
    // partial Fisher-Yates
    for (std::size_t i = 0; i < n; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(population - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

ShapReport shapley_exact(const TrainedModel& model, const FeatureMatrix& rows, const FeatureMatrix& background) {
    check_schema(model);
    require(background.rows > 0, ErrorKind::Specification, "Shapley background must not be empty");
    rows.validate();
    background.validate();

    ShapReport report;
    report.background_size = background.rows;
    report.phi.resize(rows.rows);
    report.predictions.resize(rows.rows);
    const auto nb = static_cast<double>(background.rows);

    double base = 0.0;
    for (std::size_t b = 0; b < background.rows; ++b) base += predict_row(model, background.row(b));
    report.base_value = base / nb;

    parallel_for(rows.rows, [&](std::size_t r) {
        const auto x = rows.row(r);
        std::array<double, kCoalitions> v{};
        v[0] = report.base_value;
        const double fx = predict_row(model, x);
        // v(F) is averaged like every other coalition so that a feature the
        // model ignores yields bitwise-equal values and phi exactly zero
        std::array<double, kNumFeatures> z{};
        for (std::size_t mask = 1; mask < kCoalitions; ++mask) {
            double s = 0.0;
            for (std::size_t b = 0; b < background.rows; ++b) {
                const auto bg = background.row(b);
                for (std::size_t j = 0; j < kNumFeatures; ++j) z[j] = (mask >> j) & 1u ? x[j] : bg[j];
                s += predict_row(model, z);
            }
            v[mask] = s / nb;
        }
        Attribution phi{};
        for (std::size_t i = 0; i < kNumFeatures; ++i) {
            const std::size_t bit = std::size_t{1} << i;
            double acc = 0.0;
            for (std::size_t mask = 0; mask < kCoalitions; ++mask) {
                if (mask & bit) continue;
                acc += kWeight[popcount(mask)] * (v[mask | bit] - v[mask]);
            }
            phi[i] = acc;
        }
        report.phi[r] = phi;
        report.predictions[r] = fx;
    });
    return report;
}

Attribution gain_importance(const TrainedModel& model) {
    require(is_tree_family(model.family), ErrorKind::Capability,
            "gain importance needs a tree ensemble, got " + std::string(to_string(model.family)));
    Attribution total{};
    for (const auto& tree : model.ensemble.trees) {
        for (const auto& node : tree.nodes) {
            if (node.feature >= 0) total[static_cast<std::size_t>(node.feature)] += node.gain;
        }
    }
    const double sum = std::accumulate(total.begin(), total.end(), 0.0);
    if (sum > 0.0) {
        for (auto& t : total) t /= sum;
    }
    return total;
}

std::string shap_to_csv(const ShapReport& report, const std::vector<std::size_t>& row_ids) {
    require(row_ids.size() == report.phi.size(), ErrorKind::Consistency, "row id count differs from report");
    static constexpr std::string_view header[] = {"row",     "base_value",      "phi_log10_kie", "phi_T",
                                                  "phi_log10_k_tun", "phi_eta", "prediction"};
    CsvWriter w(header);
    for (std::size_t i = 0; i < report.phi.size(); ++i) {
        w.field(static_cast<long long>(row_ids[i])).field(report.base_value);
        for (double p : report.phi[i]) w.field(p);
        w.field(report.predictions[i]);
        w.end_row();
    }
    return w.str();
}

}  // namespace tunnelkit
