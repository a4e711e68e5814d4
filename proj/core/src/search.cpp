#include "tunnelkit/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <set>

#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

std::string_view to_string(ParamScale scale) noexcept {
    switch (scale) {
        case ParamScale::Linear:
            return "linear";
        case ParamScale::Log:
            return "log";
        case ParamScale::Integer:
            return "int";
    }
    return "unknown";
}

ParamScale param_scale_from_string(std::string_view name) {
    if (name == "linear") return ParamScale::Linear;
    if (name == "log") return ParamScale::Log;
    if (name == "int") return ParamScale::Integer;
    fail(ErrorKind::Specification, "unknown parameter scale '" + std::string(name) + "'");
}

std::string_view to_string(SearchStrategy strategy) noexcept {
    return strategy == SearchStrategy::Random ? "random" : "tpe";
}

SearchStrategy search_strategy_from_string(std::string_view name) {
    if (name == "random") return SearchStrategy::Random;
    if (name == "tpe") return SearchStrategy::TPE;
    fail(ErrorKind::Specification, "unknown search strategy '" + std::string(name) + "'");
}

void HyperSpace::validate() const {
    std::set<std::string> seen;
    for (const auto& p : params) {
        require(seen.insert(p.name).second, ErrorKind::Specification, "duplicate parameter '" + p.name + "'");
        require(std::isfinite(p.lo) && std::isfinite(p.hi) && p.lo < p.hi, ErrorKind::Specification,
                "parameter '" + p.name + "' needs lo < hi");
        if (p.scale == ParamScale::Log) {
            require(p.lo > 0.0, ErrorKind::Specification, "log-scale parameter '" + p.name + "' needs lo > 0");
        }
    }
}

HyperSpace default_space(Family family) {
    switch (family) {
        case Family::Ridge:
            return {{{"alpha", 1e-6, 1e3, ParamScale::Log}}};
        case Family::PLSR:
            return {{{"n_components", 1, 4, ParamScale::Integer}}};
        case Family::ExtraTrees:
        case Family::RandomForest:
            return {{{"n_trees", 50, 300, ParamScale::Integer},
                     {"max_depth", 1, 10, ParamScale::Integer},
                     {"max_features", 1, 4, ParamScale::Integer},
                     {"min_samples_leaf", 1, 20, ParamScale::Integer}}};
        case Family::GBDT:
            return {{{"n_trees", 50, 2000, ParamScale::Integer},
                     {"learning_rate", 0.01, 1.0, ParamScale::Log},
                     {"max_depth", 1, 10, ParamScale::Integer},
                     {"subsample", 0.5, 1.0, ParamScale::Linear},
                     {"min_samples_leaf", 1, 20, ParamScale::Integer}}};
        case Family::XGB:
            return {{{"n_trees", 50, 2000, ParamScale::Integer},
                     {"learning_rate", 0.01, 1.0, ParamScale::Log},
                     {"max_depth", 1, 10, ParamScale::Integer},
                     {"min_child_weight", 1e-3, 10.0, ParamScale::Log},
                     {"l2_leaf", 0.0, 10.0, ParamScale::Linear},
                     {"subsample", 0.5, 1.0, ParamScale::Linear}}};
    }
    return {};
}

namespace {

// Search happens in a transformed coordinate: log for Log ranges, and a
// half-unit widened interval for Integer ranges so that every integer gets an
// equal share under uniform sampling.
struct Interval {
    double lo;
    double hi;
};

Interval internal_interval(const ParamRange& p) {
    switch (p.scale) {
        case ParamScale::Log:
            return {std::log(p.lo), std::log(p.hi)};
        case ParamScale::Integer:
            return {std::round(p.lo) - 0.5, std::round(p.hi) + 0.5};
        case ParamScale::Linear:
            break;
    }
    return {p.lo, p.hi};
}

double to_internal(const ParamRange& p, double value) {
    return p.scale == ParamScale::Log ? std::log(value) : value;
}

double from_internal(const ParamRange& p, double u) {
    switch (p.scale) {
        case ParamScale::Log:
            return std::clamp(std::exp(u), p.lo, p.hi);
        case ParamScale::Integer:
            return std::clamp(std::round(u), std::round(p.lo), std::round(p.hi));
        case ParamScale::Linear:
            break;
    }
    return std::clamp(u, p.lo, p.hi);
}

Hyperparameters random_point(const HyperSpace& space, Rng& rng) {
    Hyperparameters out;
    for (const auto& p : space.params) {
        const auto iv = internal_interval(p);
        out[p.name] = from_internal(p, rng.uniform(iv.lo, iv.hi));
    }
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Mixture of Gaussians truncated to the interval: one component per
// observation plus a broad prior component centred on the interval.
class Parzen {
public:
    Parzen(std::vector<double> obs, Interval iv) : iv_(iv) {
        const double width = iv.hi - iv.lo;
        mus_ = std::move(obs);
        mus_.push_back(0.5 * (iv.lo + iv.hi));
        std::vector<std::size_t> order(mus_.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mus_[a] < mus_[b]; });
        sigmas_.assign(mus_.size(), width);
        const double n = static_cast<double>(mus_.size());
        const double min_sigma = width / std::min(100.0, 1.0 + n);
        for (std::size_t k = 0; k < order.size(); ++k) {
            const std::size_t i = order[k];
            if (i + 1 == mus_.size()) continue;  // the prior keeps the full width
            const double left = k == 0 ? iv.lo : mus_[order[k - 1]];
            const double right = k + 1 == order.size() ? iv.hi : mus_[order[k + 1]];
            const double s = std::max(mus_[i] - left, right - mus_[i]);
            sigmas_[i] = std::clamp(s, min_sigma, width);
        }
        mass_.resize(mus_.size());
        for (std::size_t i = 0; i < mus_.size(); ++i) {
            mass_[i] = normal_cdf((iv.hi - mus_[i]) / sigmas_[i]) - normal_cdf((iv.lo - mus_[i]) / sigmas_[i]);
            mass_[i] = std::max(mass_[i], 1e-300);
        }
    }

    double sample(Rng& rng) const {
        const auto k = static_cast<std::size_t>(rng.below(mus_.size()));
        for (int attempt = 0; attempt < 100; ++attempt) {
            const double u = mus_[k] + sigmas_[k] * rng.normal();
            if (u >= iv_.lo && u <= iv_.hi) return u;
        }
        return std::clamp(mus_[k], iv_.lo, iv_.hi);
    }

    double log_pdf(double u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < mus_.size(); ++i) {
            const double z = (u - mus_[i]) / sigmas_[i];
            s += std::exp(-0.5 * z * z) / (sigmas_[i] * mass_[i]);
        }
        return std::log(std::max(s / (static_cast<double>(mus_.size()) * std::sqrt(2.0 * std::numbers::pi)),
                                 1e-300));
    }

private:
    Interval iv_;
    std::vector<double> mus_;
    std::vector<double> sigmas_;
    std::vector<double> mass_;
};

Hyperparameters tpe_point(const HyperSpace& space, const std::vector<Trial>& trials, const TpeOptions& opt,
                          Rng& rng) {
    std::vector<const Trial*> done;
    for (const auto& t : trials) {
        if (std::isfinite(t.val_rmse)) done.push_back(&t);
    }
    if (static_cast<int>(done.size()) < opt.n_startup) return random_point(space, rng);
    std::stable_sort(done.begin(), done.end(), [](const Trial* a, const Trial* b) { return a->val_rmse < b->val_rmse; });
    const auto n_good = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.gamma * done.size())));

    std::vector<Parzen> good, bad;
    for (const auto& p : space.params) {
        std::vector<double> lo_obs, hi_obs;
        for (std::size_t i = 0; i < done.size(); ++i) {
            (i < n_good ? lo_obs : hi_obs).push_back(to_internal(p, done[i]->params.at(p.name)));
        }
        good.emplace_back(std::move(lo_obs), internal_interval(p));
        bad.emplace_back(std::move(hi_obs), internal_interval(p));
    }

    std::vector<double> best_u;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < opt.n_candidates; ++c) {
        std::vector<double> u(space.params.size());
        double score = 0.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            u[j] = good[j].sample(rng);
            score += good[j].log_pdf(u[j]) - bad[j].log_pdf(u[j]);
        }
        if (score > best_score) {
            best_score = score;
            best_u = std::move(u);
        }
    }
    Hyperparameters out;
    for (std::size_t j = 0; j < space.params.size(); ++j) {
        out[space.params[j].name] = from_internal(space.params[j], best_u[j]);
    }
    return out;
}

void run_trial(Trial& trial, const Objective& objective) {
    try {
        trial.val_rmse = objective(trial.index, trial.params);
        if (!std::isfinite(trial.val_rmse)) {
            trial.error = "non-finite validation loss";
            trial.val_rmse = std::numeric_limits<double>::quiet_NaN();
        }
    } catch (const Error& e) {
        trial.val_rmse = std::numeric_limits<double>::quiet_NaN();
        trial.error = e.what();
    }
}

}  // namespace

SearchResult search(const HyperSpace& space, const Objective& objective, int budget, SearchStrategy strategy,
                    std::uint64_t seed, const TpeOptions& tpe) {
    require(budget >= 1, ErrorKind::Specification, "search budget must be at least 1");
    space.validate();
    Rng rng(seed);
    SearchResult result;
    result.trials.resize(static_cast<std::size_t>(budget));
    if (strategy == SearchStrategy::Random) {
        for (int i = 0; i < budget; ++i) {
            result.trials[static_cast<std::size_t>(i)].index = i;
            result.trials[static_cast<std::size_t>(i)].params = random_point(space, rng);
        }
        parallel_for(result.trials.size(), [&](std::size_t i) { run_trial(result.trials[i], objective); });
    } else {
        std::vector<Trial> history;
        for (int i = 0; i < budget; ++i) {
            Trial t;
            t.index = i;
            t.params = tpe_point(space, history, tpe, rng);
            run_trial(t, objective);
            history.push_back(t);
        }
        result.trials = std::move(history);
    }
    for (const auto& t : result.trials) {
        if (std::isfinite(t.val_rmse) && (result.best_trial < 0 || t.val_rmse < result.best_rmse)) {
            result.best_trial = t.index;
            result.best_rmse = t.val_rmse;
            result.best_params = t.params;
        }
    }
    if (result.best_trial < 0) {
        fail(ErrorKind::Training, "all " + std::to_string(budget) + " search trials failed; first error: " +
                                      result.trials.front().error);
    }
    return result;
}

FamilySearch search_family(Family family, const HyperSpace& space, const FeatureMatrix& x_train,
                           std::span<const double> y_train, const FeatureMatrix& x_val, std::span<const double> y_val,
                           int budget, SearchStrategy strategy, std::uint64_t seed) {
    require(x_val.rows == y_val.size() && x_val.rows > 0, ErrorKind::Consistency, "validation set is empty");
    const std::uint64_t fit_seed = derive_seed(seed, 1);
    std::mutex mutex;
    FamilySearch out;
    double kept_loss = std::numeric_limits<double>::infinity();
    int kept_index = -1;
    const Objective objective = [&](int index, const Hyperparameters& params) {
        TrainedModel model = fit(family, params, x_train, y_train, fit_seed, ValidationSet{&x_val, y_val});
        const auto pred = predict(model, x_val);
        double s = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - y_val[i]) * (pred[i] - y_val[i]);
        const double loss = std::sqrt(s / static_cast<double>(pred.size()));
        std::lock_guard lock(mutex);
        // same (loss, index) order as the search itself, whatever the completion order
        if (std::isfinite(loss) && (loss < kept_loss || (loss == kept_loss && index < kept_index))) {
            kept_loss = loss;
            kept_index = index;
            out.best_model = std::move(model);
        }
        return loss;
    };
    out.result = search(space, objective, budget, strategy, derive_seed(seed, 0));
    return out;
}

std::string params_to_json(const Hyperparameters& params) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [name, value] : params) {
        if (value == std::round(value) && std::abs(value) < 9e15) {
            j[name] = static_cast<long long>(value);
        } else {
            j[name] = value;
        }
    }
    return j.dump();
}

std::string trial_log_to_csv(Family family, const std::vector<Trial>& trials) {
    static constexpr std::string_view header[] = {"trial", "family", "params_json", "val_rmse"};
    CsvWriter w(header);
    for (const auto& t : trials) {
        w.field(static_cast<long long>(t.index))
            .field(to_string(family))
            .field(quote_field(params_to_json(t.params)))
            .field(t.val_rmse);
        w.end_row();
    }
    return w.str();
}

}  // namespace tunnelkit
