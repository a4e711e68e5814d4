#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tunnelkit {

inline constexpr std::size_t kNumFeatures = 4;

// Row-major n x 4 matrix; column order [log10_kie, T_K, log10_k_tun, eta].
struct FeatureMatrix {
    std::size_t rows = 0;
    std::vector<double> values;

    FeatureMatrix() = default;
    explicit FeatureMatrix(std::size_t n) : rows(n), values(n * kNumFeatures, 0.0) {}

    double operator()(std::size_t i, std::size_t j) const { return values[i * kNumFeatures + j]; }
    double& operator()(std::size_t i, std::size_t j) { return values[i * kNumFeatures + j]; }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * kNumFeatures, kNumFeatures}; }

    // Throws Data on a non-finite entry.
    void validate() const;
};

FeatureMatrix take_rows(const FeatureMatrix& x, std::span<const std::size_t> rows);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double count = 0.0;  // hessian (sample weight) sum reaching the node
    double gain = 0.0;   // squared-error reduction of the split, 0 for leaves
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(std::span<const double> row) const;
    std::size_t leaf_count() const;
    int depth() const;
};

struct TreeParams {
    int max_depth = 6;
    int max_features = 4;            // features tried per node, drawn without replacement
    double min_child_hessian = 0.0;  // candidate splits with a lighter child are skipped
    double min_child_weight = 0.0;   // a chosen split with a lighter child is pruned to a leaf
    double l2 = 0.0;                 // leaf value -G / (H + l2)
    bool random_thresholds = false;  // extra-trees: one uniform threshold per feature
};

// Presorted column order of a feature matrix, reused across trees.
struct SortedColumns {
    std::vector<std::vector<std::uint32_t>> order;  // per feature, rows by ascending value
    std::vector<std::vector<double>> values;        // the feature values in that order

    explicit SortedColumns(const FeatureMatrix& x);
};

// Exact greedy second-order tree on gradients g and hessians h. Rows with
// h == 0 are ignored (bootstrap out-of-bag, subsampled out). Leaf values are
// -G / (H + l2). Split candidates are midpoints between consecutive distinct
// values; x <= threshold goes left. Ties in gain keep the lowest feature index
// and then the lowest threshold.
Tree build_tree(const FeatureMatrix& x, const SortedColumns& sorted, std::span<const double> g,
                std::span<const double> h, const TreeParams& params, std::uint64_t seed);

}  // namespace tunnelkit
