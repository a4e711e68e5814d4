#include "tunnelkit/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/random.hpp"

namespace tunnelkit {

using json = nlohmann::ordered_json;

namespace {

constexpr int kPatience = 50;

struct FamilyName {
    Family family;
    std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {Family::Ridge, "ridge"},       {Family::PLSR, "plsr"}, {Family::ExtraTrees, "extra_trees"},
    {Family::RandomForest, "random_forest"}, {Family::GBDT, "gbdt"}, {Family::XGB, "xgb"},
};

}  // namespace

std::string_view to_string(Family family) noexcept {
    for (const auto& f : kFamilyNames) {
        if (f.family == family) return f.name;
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    for (const auto& f : kFamilyNames) {
        if (f.name == name) return f.family;
    }
    fail(ErrorKind::Specification, "unknown model family '" + std::string(name) + "'");
}

bool is_tree_family(Family family) noexcept { return family != Family::Ridge && family != Family::PLSR; }

Hyperparameters default_hyperparameters(Family family) {
    switch (family) {
        case Family::Ridge:
            return {{"alpha", 1.0}};
        case Family::PLSR:
            return {{"n_components", 2.0}};
        case Family::ExtraTrees:
        case Family::RandomForest:
            return {{"max_depth", 10.0}, {"max_features", 3.0}, {"min_samples_leaf", 1.0}, {"n_trees", 100.0}};
        case Family::GBDT:
            return {{"learning_rate", 0.1},
                    {"max_depth", 4.0},
                    {"min_samples_leaf", 1.0},
                    {"n_trees", 500.0},
                    {"subsample", 1.0}};
        case Family::XGB:
            return {{"l2_leaf", 1.0},         {"learning_rate", 0.1}, {"max_depth", 6.0},
                    {"min_child_weight", 1.0}, {"n_trees", 500.0},     {"subsample", 1.0}};
    }
    return {};
}

std::array<double, kNumFeatures> TrainedModel::raw_coefficients() const {
    require(!is_tree_family(family), ErrorKind::Capability, "raw coefficients need a linear model");
    std::array<double, kNumFeatures> out{};
    for (std::size_t j = 0; j < kNumFeatures; ++j) out[j] = linear.coefficients[j] / linear.scales[j];
    return out;
}

void check_schema(const TrainedModel& model) {
    bool ok = model.features.size() == kNumFeatures;
    for (std::size_t j = 0; ok && j < kNumFeatures; ++j) ok = model.features[j] == kFeatureNames[j];
    require(ok, ErrorKind::Consistency, "model feature schema does not match [log10_kie, T_K, log10_k_tun, eta]");
}

namespace {

// Merged view of the caller's parameters over the family defaults.
class Params {
public:
    Params(Family family, const Hyperparameters& given) : values_(default_hyperparameters(family)) {
        for (const auto& [name, value] : given) {
            require(values_.count(name) != 0, ErrorKind::Specification,
                    "hyperparameter '" + name + "' does not apply to " + std::string(to_string(family)));
            require(std::isfinite(value), ErrorKind::Specification, "hyperparameter '" + name + "' is not finite");
            values_[name] = value;
        }
    }

    double real(const std::string& name, double lo, double hi) const {
        const double v = values_.at(name);
        require(v >= lo && v <= hi, ErrorKind::Specification,
                "hyperparameter '" + name + "' outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    }

    int integer(const std::string& name, int lo, int hi) const {
        return static_cast<int>(std::lround(real(name, lo, hi)));
    }

    const Hyperparameters& all() const { return values_; }

private:
    Hyperparameters values_;
};

double mean_of(std::span<const double> y) {
    return std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
}

void check_training_data(const FeatureMatrix& x, std::span<const double> y) {
    require(x.rows == y.size(), ErrorKind::Consistency, "feature rows and targets differ in length");
    require(y.size() >= 2, ErrorKind::Training, "need at least two training rows");
    x.validate();
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(y[i])) fail(ErrorKind::Data, "non-finite target at row " + std::to_string(i));
    }
    const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
    require(*lo < *hi, ErrorKind::Training, "target has zero variance");
}

void standardize(const FeatureMatrix& x, LinearPayload& payload, Eigen::MatrixXd& z) {
    const auto n = static_cast<Eigen::Index>(x.rows);
    z.resize(n, kNumFeatures);
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) mean += x(i, j);
        mean /= static_cast<double>(x.rows);
        double var = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
        var /= static_cast<double>(x.rows);
        const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
        payload.means[j] = mean;
        payload.scales[j] = scale;
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i, static_cast<Eigen::Index>(j)) = (x(static_cast<std::size_t>(i), j) - mean) / scale;
        }
    }
}

void fit_ridge(TrainedModel& model, const Params& p, const FeatureMatrix& x, std::span<const double> y) {
    const double alpha = p.real("alpha", 0.0, 1e12);
    Eigen::MatrixXd z;
    standardize(x, model.linear, z);
    const double ybar = mean_of(y);
    const auto n = z.rows();
    const auto d = static_cast<Eigen::Index>(kNumFeatures);
    // penalized least squares as an augmented QR problem
    Eigen::MatrixXd a(n + d, d);
    Eigen::VectorXd b(n + d);
    a.topRows(n) = z;
    a.bottomRows(d) = std::sqrt(alpha) * Eigen::MatrixXd::Identity(d, d);
    for (Eigen::Index i = 0; i < n; ++i) b(i) = y[static_cast<std::size_t>(i)] - ybar;
    b.tail(d).setZero();
    const Eigen::VectorXd w = a.colPivHouseholderQr().solve(b);
    for (std::size_t j = 0; j < kNumFeatures; ++j) model.linear.coefficients[j] = w(static_cast<Eigen::Index>(j));
    model.linear.intercept = ybar;
}

// PLS1 by NIPALS on z-scored features and centered target.
void fit_plsr(TrainedModel& model, const Params& p, const FeatureMatrix& x, std::span<const double> y) {
    const int k = p.integer("n_components", 1, static_cast<int>(kNumFeatures));
    Eigen::MatrixXd e;
    standardize(x, model.linear, e);
    const double ybar = mean_of(y);
    Eigen::VectorXd f(e.rows());
    for (Eigen::Index i = 0; i < e.rows(); ++i) f(i) = y[static_cast<std::size_t>(i)] - ybar;

    const auto d = static_cast<Eigen::Index>(kNumFeatures);
    Eigen::MatrixXd w_mat(d, k), p_mat(d, k);
    Eigen::VectorXd q(k);
    int used = 0;
    for (int a = 0; a < k; ++a) {
        Eigen::VectorXd w = e.transpose() * f;
        const double norm = w.norm();
        if (!(norm > 1e-12 * std::sqrt(static_cast<double>(e.rows())))) break;
        w /= norm;
        const Eigen::VectorXd t = e * w;
        const double tt = t.squaredNorm();
        if (!(tt > 0.0)) break;
        const Eigen::VectorXd load = e.transpose() * t / tt;
        const double qa = f.dot(t) / tt;
        e -= t * load.transpose();
        f -= qa * t;
        w_mat.col(a) = w;
        p_mat.col(a) = load;
        q(a) = qa;
        ++used;
    }
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
    if (used > 0) {
        const auto wk = w_mat.leftCols(used);
        const Eigen::MatrixXd pw = p_mat.leftCols(used).transpose() * wk;
        beta = wk * pw.colPivHouseholderQr().solve(q.head(used));
    }
    for (std::size_t j = 0; j < kNumFeatures; ++j) model.linear.coefficients[j] = beta(static_cast<Eigen::Index>(j));
    model.linear.intercept = ybar;
}

void fit_forest(TrainedModel& model, const Params& p, const FeatureMatrix& x, std::span<const double> y,
                std::uint64_t seed, bool bootstrap) {
    const int n_trees = p.integer("n_trees", 1, 100000);
    TreeParams tp;
    tp.max_depth = p.integer("max_depth", 1, 32);
    tp.max_features = p.integer("max_features", 1, static_cast<int>(kNumFeatures));
    tp.min_child_hessian = p.integer("min_samples_leaf", 1, 1000000);
    tp.random_thresholds = !bootstrap;

    const SortedColumns sorted(x);
    auto& trees = model.ensemble.trees;
    trees.resize(static_cast<std::size_t>(n_trees));
    parallel_for(trees.size(), [&](std::size_t t) {
        const std::uint64_t tree_seed = derive_seed(seed, t);
        std::vector<double> w(x.rows, 1.0);
        if (bootstrap) {
            Rng rng(derive_seed(tree_seed, 0x5eed));
            std::fill(w.begin(), w.end(), 0.0);
            for (std::size_t i = 0; i < x.rows; ++i) w[rng.below(x.rows)] += 1.0;
        }
        std::vector<double> g(x.rows);
        for (std::size_t i = 0; i < x.rows; ++i) g[i] = -w[i] * y[i];
        trees[t] = build_tree(x, sorted, g, w, tp, tree_seed);
    });
    model.ensemble.average = true;
    model.ensemble.shrinkage = 1.0;
    model.ensemble.base_score = 0.0;
}

double rmse_between(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

void fit_boosted(TrainedModel& model, const Params& p, const FeatureMatrix& x, std::span<const double> y,
                 std::uint64_t seed, const std::optional<ValidationSet>& validation, bool second_order) {
    const int n_trees = p.integer("n_trees", 0, 100000);
    const double lr = p.real("learning_rate", 1e-6, 1.0);
    const double subsample = p.real("subsample", 1e-6, 1.0);
    TreeParams tp;
    tp.max_depth = p.integer("max_depth", 1, 32);
    if (second_order) {
        tp.l2 = p.real("l2_leaf", 0.0, 1e12);
        tp.min_child_weight = p.real("min_child_weight", 0.0, 1e12);
    } else {
        tp.min_child_hessian = p.integer("min_samples_leaf", 1, 1000000);
    }

    auto& ens = model.ensemble;
    ens.average = false;
    ens.shrinkage = lr;
    ens.base_score = mean_of(y);

    const SortedColumns sorted(x);
    std::vector<double> f(x.rows, ens.base_score), g(x.rows), h(x.rows, 1.0);
    const bool early = validation.has_value() && validation->x != nullptr && validation->x->rows > 0;
    std::vector<double> fv;
    double best_val = 0.0;
    std::size_t best_rounds = 0;
    if (early) {
        require(validation->x->rows == validation->y.size(), ErrorKind::Consistency,
                "validation rows and targets differ in length");
        fv.assign(validation->x->rows, ens.base_score);
        best_val = rmse_between(fv, validation->y);
    }
    Rng rng(seed);
    for (int t = 0; t < n_trees; ++t) {
        if (subsample < 1.0) {
            for (auto& hi : h) hi = rng.uniform() < subsample ? 1.0 : 0.0;
        }
        for (std::size_t i = 0; i < x.rows; ++i) g[i] = h[i] * (f[i] - y[i]);
        ens.trees.push_back(build_tree(x, sorted, g, h, tp, derive_seed(seed, static_cast<std::uint64_t>(t))));
        const Tree& tree = ens.trees.back();
        for (std::size_t i = 0; i < x.rows; ++i) f[i] += lr * tree.predict(x.row(i));
        if (early) {
            for (std::size_t i = 0; i < fv.size(); ++i) fv[i] += lr * tree.predict(validation->x->row(i));
            const double v = rmse_between(fv, validation->y);
            if (v < best_val) {
                best_val = v;
                best_rounds = ens.trees.size();
            } else if (static_cast<int>(ens.trees.size() - best_rounds) >= kPatience) {
                break;
            }
        }
    }
    if (early) ens.trees.resize(best_rounds);
}

}  // namespace

TrainedModel fit(Family family, const Hyperparameters& hyperparameters, const FeatureMatrix& x,
                 std::span<const double> y, std::uint64_t seed, std::optional<ValidationSet> validation) {
    const Params p(family, hyperparameters);
    check_training_data(x, y);
    TrainedModel model;
    model.family = family;
    model.hyperparameters = p.all();
    switch (family) {
        case Family::Ridge:
            fit_ridge(model, p, x, y);
            break;
        case Family::PLSR:
            fit_plsr(model, p, x, y);
            break;
        case Family::RandomForest:
            fit_forest(model, p, x, y, seed, true);
            break;
        case Family::ExtraTrees:
            fit_forest(model, p, x, y, seed, false);
            break;
        case Family::GBDT:
            fit_boosted(model, p, x, y, seed, validation, false);
            break;
        case Family::XGB:
            fit_boosted(model, p, x, y, seed, validation, true);
            break;
    }
    return model;
}

double predict_row(const TrainedModel& model, std::span<const double> row) {
    if (!is_tree_family(model.family)) {
        const auto& lin = model.linear;
        double s = lin.intercept;
        for (std::size_t j = 0; j < kNumFeatures; ++j) s += lin.coefficients[j] * ((row[j] - lin.means[j]) / lin.scales[j]);
        return s;
    }
    const auto& ens = model.ensemble;
    if (ens.average) {
        if (ens.trees.empty()) return ens.base_score;
        double s = 0.0;
        for (const auto& t : ens.trees) s += t.predict(row);
        return s / static_cast<double>(ens.trees.size());
    }
    double s = ens.base_score;
    for (const auto& t : ens.trees) s += ens.shrinkage * t.predict(row);
    return s;
}

std::vector<double> predict(const TrainedModel& model, const FeatureMatrix& x) {
    check_schema(model);
    x.validate();
    std::vector<double> out(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out[i] = predict_row(model, x.row(i));
    return out;
}

std::vector<std::vector<double>> staged_predict(const TrainedModel& model, const FeatureMatrix& x) {
    require(model.family == Family::GBDT || model.family == Family::XGB, ErrorKind::Capability,
            "staged predictions need a boosted model");
    const auto& ens = model.ensemble;
    std::vector<std::vector<double>> stages;
    std::vector<double> f(x.rows, ens.base_score);
    stages.push_back(f);
    for (const auto& t : ens.trees) {
        for (std::size_t i = 0; i < x.rows; ++i) f[i] += ens.shrinkage * t.predict(x.row(i));
        stages.push_back(f);
    }
    return stages;
}

namespace {

json tree_to_json(const Tree& tree) {
    json feature = json::array(), threshold = json::array(), left = json::array(), right = json::array(),
         value = json::array(), count = json::array(), gain = json::array();
    for (const auto& n : tree.nodes) {
        feature.push_back(n.feature);
        threshold.push_back(n.threshold);
        left.push_back(n.left);
        right.push_back(n.right);
        value.push_back(n.value);
        count.push_back(n.count);
        gain.push_back(n.gain);
    }
    return json{{"feature", feature}, {"threshold", threshold}, {"left", left},  {"right", right},
                {"value", value},     {"count", count},         {"gain", gain}};
}

template <typename T>
T get_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) fail(ErrorKind::Format, std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, std::string("bad field '") + key + "': " + e.what());
    }
}

Tree tree_from_json(const json& j) {
    const auto feature = get_field<std::vector<int>>(j, "feature");
    const auto threshold = get_field<std::vector<double>>(j, "threshold");
    const auto left = get_field<std::vector<int>>(j, "left");
    const auto right = get_field<std::vector<int>>(j, "right");
    const auto value = get_field<std::vector<double>>(j, "value");
    const auto count = get_field<std::vector<double>>(j, "count");
    const auto gain = get_field<std::vector<double>>(j, "gain");
    const std::size_t n = feature.size();
    require(n > 0 && threshold.size() == n && left.size() == n && right.size() == n && value.size() == n &&
                count.size() == n && gain.size() == n,
            ErrorKind::Format, "tree node arrays differ in length");
    Tree tree;
    tree.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& node = tree.nodes[i];
        node = TreeNode{feature[i], threshold[i], left[i], right[i], value[i], count[i], gain[i]};
        require(std::isfinite(node.value) && std::isfinite(node.threshold), ErrorKind::Format,
                "non-finite tree node value");
        require(node.feature >= -1 && node.feature < static_cast<int>(kNumFeatures), ErrorKind::Format,
                "tree node feature index out of range");
        if (node.feature >= 0) {
            // preorder layout: children come after their parent, which rules out cycles
            const auto self = static_cast<int>(i);
            require(node.left > self && node.right > self && node.left < static_cast<int>(n) &&
                        node.right < static_cast<int>(n) && node.left != node.right,
                    ErrorKind::Format, "tree node children out of order");
        }
    }
    return tree;
}

template <std::size_t N>
json array_json(const std::array<double, N>& a) {
    return json(std::vector<double>(a.begin(), a.end()));
}

template <std::size_t N>
std::array<double, N> array_from(const json& j, const char* key) {
    const auto v = get_field<std::vector<double>>(j, key);
    require(v.size() == N, ErrorKind::Format, std::string("field '") + key + "' has wrong length");
    std::array<double, N> out{};
    std::copy(v.begin(), v.end(), out.begin());
    return out;
}

}  // namespace

std::string serialize(const TrainedModel& model) {
    json doc;
    doc["format"] = "tunnelkit-model";
    doc["version"] = std::string(kModelFormatVersion);
    doc["family"] = std::string(to_string(model.family));
    doc["features"] = model.features;
    json hp = json::object();
    for (const auto& [k, v] : model.hyperparameters) hp[k] = v;
    doc["hyperparameters"] = hp;
    json payload;
    if (is_tree_family(model.family)) {
        const auto& e = model.ensemble;
        payload["base_score"] = e.base_score;
        payload["shrinkage"] = e.shrinkage;
        payload["average"] = e.average;
        json trees = json::array();
        for (const auto& t : e.trees) trees.push_back(tree_to_json(t));
        payload["trees"] = std::move(trees);
    } else {
        const auto& l = model.linear;
        payload["means"] = array_json(l.means);
        payload["scales"] = array_json(l.scales);
        payload["coefficients"] = array_json(l.coefficients);
        payload["intercept"] = l.intercept;
    }
    doc["payload"] = std::move(payload);
    return doc.dump() + "\n";
}

TrainedModel deserialize(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        fail(ErrorKind::Format, std::string("model document is not valid JSON: ") + e.what());
    }
    require(get_field<std::string>(doc, "format") == "tunnelkit-model", ErrorKind::Format,
            "not a tunnelkit model document");
    const auto version = get_field<std::string>(doc, "version");
    int major = -1;
    const auto [ptr, ec] = std::from_chars(version.data(), version.data() + version.size(), major);
    require(ec == std::errc{} && ptr != version.data() + version.size() && *ptr == '.' && major == 1,
            ErrorKind::Format, "unsupported model format version '" + version + "'");

    TrainedModel model;
    const auto family = get_field<std::string>(doc, "family");
    try {
        model.family = family_from_string(family);
    } catch (const Error&) {
        fail(ErrorKind::Format, "unknown model family '" + family + "'");
    }
    model.features = get_field<std::vector<std::string>>(doc, "features");
    const auto hp = get_field<std::map<std::string, double>>(doc, "hyperparameters");
    model.hyperparameters = Hyperparameters(hp.begin(), hp.end());
    const json payload = get_field<json>(doc, "payload");
    if (is_tree_family(model.family)) {
        auto& e = model.ensemble;
        e.base_score = get_field<double>(payload, "base_score");
        e.shrinkage = get_field<double>(payload, "shrinkage");
        e.average = get_field<bool>(payload, "average");
        const json trees = get_field<json>(payload, "trees");
        require(trees.is_array(), ErrorKind::Format, "trees must be an array");
        for (const auto& t : trees) e.trees.push_back(tree_from_json(t));
    } else {
        auto& l = model.linear;
        l.means = array_from<kNumFeatures>(payload, "means");
        l.scales = array_from<kNumFeatures>(payload, "scales");
        l.coefficients = array_from<kNumFeatures>(payload, "coefficients");
        l.intercept = get_field<double>(payload, "intercept");
        for (double s : l.scales) require(s > 0.0, ErrorKind::Format, "feature scale must be positive");
    }
    return model;
}

}  // namespace tunnelkit
