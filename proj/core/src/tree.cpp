#include "tunnelkit/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "tunnelkit/errors.hpp"
#include "tunnelkit/random.hpp"

namespace tunnelkit {

void FeatureMatrix::validate() const {
    require(values.size() == rows * kNumFeatures, ErrorKind::Consistency, "feature matrix has wrong size");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            fail(ErrorKind::Data, "non-finite feature at row " + std::to_string(i / kNumFeatures) + ", column " +
                                      std::to_string(i % kNumFeatures));
        }
    }
}

FeatureMatrix take_rows(const FeatureMatrix& x, std::span<const std::size_t> rows) {
    FeatureMatrix out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(x.values.begin() + static_cast<std::ptrdiff_t>(rows[i] * kNumFeatures), kNumFeatures,
                    out.values.begin() + static_cast<std::ptrdiff_t>(i * kNumFeatures));
    }
    return out;
}

double Tree::predict(std::span<const double> row) const {
    int k = 0;
    while (nodes[k].feature >= 0) {
        const auto& n = nodes[k];
        k = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[k].value;
}

std::size_t Tree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

int Tree::depth() const {
    if (nodes.empty()) return 0;
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    // children always follow their parent in preorder
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        }
        best = std::max(best, d[i]);
    }
    return best;
}

SortedColumns::SortedColumns(const FeatureMatrix& x) : order(kNumFeatures), values(kNumFeatures) {
    require(x.rows < (std::size_t{1} << 31), ErrorKind::Capability, "too many rows for the tree builder");
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
        auto& o = order[f];
        o.resize(x.rows);
        std::iota(o.begin(), o.end(), 0u);
        std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
        values[f].resize(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) values[f][i] = x(o[i], f);
    }
}

namespace {

constexpr double kMinRelativeGain = 1e-12;

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
    double g_left = 0.0, h_left = 0.0;
};

class Builder {
public:
    Builder(const FeatureMatrix& x, const SortedColumns& sorted, std::span<const double> g,
            std::span<const double> h, const TreeParams& params, std::uint64_t seed)
        : g_(g), h_(h), params_(params), rng_(seed), goes_left_(x.rows, 0) {
        for (std::size_t f = 0; f < kNumFeatures; ++f) {
            const auto& order = sorted.order[f];
            const auto& vals = sorted.values[f];
            lists_[f].reserve(x.rows);
            vals_[f].reserve(x.rows);
            for (std::size_t i = 0; i < order.size(); ++i) {
                if (h[order[i]] > 0.0) {
                    lists_[f].push_back(order[i]);
                    vals_[f].push_back(vals[i]);
                }
            }
        }
        scratch_.resize(lists_[0].size());
        scratch_vals_.resize(lists_[0].size());
    }

    Tree run() {
        Tree tree;
        if (lists_[0].empty()) {
            tree.nodes.push_back(TreeNode{});
            return tree;
        }
        grow(tree, 0, lists_[0].size(), 0);
        return tree;
    }

private:
    double leaf_value(double G, double H) const { return -G / (H + params_.l2); }

    double score(double G, double H) const { return G * G / (H + params_.l2); }

    int grow(Tree& tree, std::size_t begin, std::size_t end, int depth) {
        double G = 0.0, H = 0.0, S = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = lists_[0][i];
            G += g_[r];
            H += h_[r];
            S += g_[r] * g_[r] / h_[r];
        }
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(TreeNode{-1, 0.0, -1, -1, leaf_value(G, H), H, 0.0});

        if (depth >= params_.max_depth || end - begin < 2) return id;

        const Split best = find_split(begin, end, G, H, S);
        if (best.feature < 0) return id;
        const double g_right = G - best.g_left;
        const double h_right = H - best.h_left;
        if (best.h_left < params_.min_child_weight || h_right < params_.min_child_weight) return id;

        const auto f = static_cast<std::size_t>(best.feature);
        std::size_t n_left = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = lists_[f][i];
            goes_left_[r] = vals_[f][i] <= best.threshold ? 1 : 0;
            n_left += goes_left_[r];
        }
        for (std::size_t k = 0; k < kNumFeatures; ++k) partition(lists_[k], vals_[k], begin, end);

        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best.feature;
        node.threshold = best.threshold;
        // unregularized squared-error reduction, used for importances
        node.gain = best.g_left * best.g_left / best.h_left + g_right * g_right / h_right - G * G / H;

        const int left = grow(tree, begin, begin + n_left, depth + 1);
        const int right = grow(tree, begin + n_left, end, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = left;
        tree.nodes[static_cast<std::size_t>(id)].right = right;
        return id;
    }

    void partition(std::vector<std::uint32_t>& list, std::vector<double>& vals, std::size_t begin, std::size_t end) {
        std::size_t l = begin, k = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const auto r = list[i];
            if (goes_left_[r]) {
                vals[l] = vals[i];
                list[l++] = r;
            } else {
                scratch_vals_[k] = vals[i];
                scratch_[k++] = r;
            }
        }
        std::copy_n(scratch_.begin(), k, list.begin() + static_cast<std::ptrdiff_t>(l));
        std::copy_n(scratch_vals_.begin(), k, vals.begin() + static_cast<std::ptrdiff_t>(l));
    }

    std::array<int, kNumFeatures> candidate_features() {
        std::array<int, kNumFeatures> all{};
        std::iota(all.begin(), all.end(), 0);
        const int m = std::clamp(params_.max_features, 1, static_cast<int>(kNumFeatures));
        if (m == static_cast<int>(kNumFeatures)) return all;
        // partial Fisher-Yates, then ascending so ties prefer the lowest index
        for (int i = 0; i < m; ++i) {
            const auto j = i + static_cast<int>(rng_.below(kNumFeatures - static_cast<std::size_t>(i)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        std::sort(all.begin(), all.begin() + m);
        for (int i = m; i < static_cast<int>(kNumFeatures); ++i) all[static_cast<std::size_t>(i)] = -1;
        return all;
    }

    Split find_split(std::size_t begin, std::size_t end, double G, double H, double S) {
        const double parent = score(G, H);
        const double min_gain = kMinRelativeGain * std::max(S, 1e-300);
        Split best;
        for (int fi : candidate_features()) {
            if (fi < 0) break;
            const auto f = static_cast<std::size_t>(fi);
            const auto& list = lists_[f];
            const auto& col = vals_[f];
            const double lo = col[begin];
            const double hi = col[end - 1];
            if (!(lo < hi)) {
                if (params_.random_thresholds) rng_.next();
                continue;
            }
            if (params_.random_thresholds) {
                const double t = rng_.uniform(lo, hi);
                double gl = 0.0, hl = 0.0;
                for (std::size_t i = begin; i < end && col[i] <= t; ++i) {
                    gl += g_[list[i]];
                    hl += h_[list[i]];
                }
                consider(best, fi, t, gl, hl, G, H, parent, min_gain);
                continue;
            }
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = begin; i + 1 < end; ++i) {
                const auto r = list[i];
                gl += g_[r];
                hl += h_[r];
                const double a = col[i];
                const double b = col[i + 1];
                if (!(a < b)) continue;
                double t = a + (b - a) * 0.5;
                if (!(t < b)) t = a;
                consider(best, fi, t, gl, hl, G, H, parent, min_gain);
            }
        }
        return best;
    }

    void consider(Split& best, int feature, double t, double gl, double hl, double G, double H, double parent,
                  double min_gain) const {
        const double hr = H - hl;
        if (hl <= 0.0 || hr <= 0.0) return;
        if (hl < params_.min_child_hessian || hr < params_.min_child_hessian) return;
        const double gain = score(gl, hl) + score(G - gl, hr) - parent;
        if (gain > min_gain && gain > best.gain) {
            best = Split{feature, t, gain, gl, hl};
        }
    }

    std::span<const double> g_;
    std::span<const double> h_;
    TreeParams params_;
    Rng rng_;
    std::array<std::vector<std::uint32_t>, kNumFeatures> lists_;
    std::array<std::vector<double>, kNumFeatures> vals_;  // feature value of each list entry
    std::vector<std::uint32_t> scratch_;
    std::vector<double> scratch_vals_;
    std::vector<unsigned char> goes_left_;
};

}  // namespace

Tree build_tree(const FeatureMatrix& x, const SortedColumns& sorted, std::span<const double> g,
                std::span<const double> h, const TreeParams& params, std::uint64_t seed) {
    require(g.size() == x.rows && h.size() == x.rows, ErrorKind::Consistency, "gradient length mismatch");
    require(params.max_depth >= 0, ErrorKind::Specification, "max_depth must be non-negative");
    return Builder(x, sorted, g, h, params, seed).run();
}

}  // namespace tunnelkit
