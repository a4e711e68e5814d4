#include "tunnelkit/config.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

using json = nlohmann::ordered_json;

HyperSpace PipelineConfig::space_for(Family family) const {
    const auto it = model.spaces.find(family);
    return it != model.spaces.end() ? it->second : default_space(family);
}

void PipelineConfig::validate() const {
    const auto range_ok = [](const Range& r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; };
    require(catalog.n_systems >= 2, ErrorKind::Specification, "catalog.n_systems must be at least 2");
    require(range_ok(catalog.v_forward_kjmol) && range_ok(catalog.eta) && range_ok(catalog.omega_cm1) &&
                range_ok(catalog.zpe_shift_kjmol) && range_ok(catalog.prefactor_scale),
            ErrorKind::Specification, "catalog ranges need lo <= hi");
    require(grid.t_min > 0.0 && grid.t_min < grid.t_max, ErrorKind::Specification, "grid needs 0 < t_min < t_max");
    require(grid.raw_step > 0.0 && grid.augment_step > 0.0, ErrorKind::Specification, "grid steps must be positive");
    require(grid.fit_window.lo < grid.fit_window.hi && grid.fit_window.lo >= grid.t_min &&
                grid.fit_window.hi <= grid.t_max,
            ErrorKind::Specification, "grid.fit_window must lie inside [t_min, t_max]");
    require(!model.families.empty(), ErrorKind::Specification, "model.families must not be empty");
    require(model.search_budget >= 1, ErrorKind::Specification, "model.search_budget must be at least 1");
    for (const auto& [family, space] : model.spaces) space.validate();
    require(split.kfold_k >= 2, ErrorKind::Specification, "split.kfold_k must be at least 2");
    require(split.test_fraction > 0.0 && split.test_fraction < 1.0, ErrorKind::Specification,
            "split.test_fraction must be in (0, 1)");
    require(explain.n_rows >= 1 && explain.background >= 1, ErrorKind::Specification,
            "explain.n_rows and explain.background must be positive");
    require(!phase.panel_temperatures.empty(), ErrorKind::Specification, "phase.panel_temperatures must not be empty");
    phase.thresholds.validate();
}

namespace {

// Walks a JSON object, consuming known keys and rejecting the rest.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) fail(ErrorKind::Specification, where() + " must be an object");
    }

    ~Section() = default;

    const json* get(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <typename T>
    void read(const char* key, T& out) {
        if (const json* v = get(key)) out = convert<T>(*v, key);
    }

    void read_range(const char* key, Range& out) {
        if (const json* v = get(key)) {
            const auto pair = convert<std::vector<double>>(*v, key);
            if (pair.size() != 2) fail(ErrorKind::Specification, where(key) + " must be [lo, hi]");
            out = {pair[0], pair[1]};
        }
    }

    Section child(const char* key) {
        const json* v = get(key);
        static const json empty = json::object();
        return Section(v ? *v : empty, where(key));
    }

    bool has(const char* key) const { return j_.contains(key); }

    // Rejects keys never asked for.
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) fail(ErrorKind::Specification, "unknown key '" + where(it.key().c_str()) + "'");
        }
    }

    const json& raw() const { return j_; }
    std::string where(const char* key = nullptr) const {
        if (!key) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

private:
    template <typename T>
    T convert(const json& v, const char* key) const {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(ErrorKind::Specification, where(key) + " must be a boolean");
        } else if constexpr (std::is_arithmetic_v<T>) {
            if (!v.is_number()) fail(ErrorKind::Specification, where(key) + " must be a number");
            if constexpr (std::is_integral_v<T>) {
                const double d = v.get<double>();
                if (d != std::floor(d)) fail(ErrorKind::Specification, where(key) + " must be an integer");
                if constexpr (std::is_unsigned_v<T>) {
                    if (d < 0) fail(ErrorKind::Specification, where(key) + " must be non-negative");
                    if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
                }
                return static_cast<T>(v.get<long long>());
            }
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(ErrorKind::Specification, where(key) + " must be a string");
        }
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            fail(ErrorKind::Specification, where(key) + " has the wrong type");
        }
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
auto spec_guard(Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Specification) throw;
        throw Error(ErrorKind::Specification, e.what());
    }
}

void parse_thresholds(Section s, RegimeThresholds& t) {
    s.read("kappa_strong", t.kappa_strong);
    s.read("kappa_classical", t.kappa_classical);
    s.read("T_low", t.T_low);
    s.read("T_high", t.T_high);
    s.read("k_low", t.k_low);
    s.read("k_high", t.k_high);
    s.read("kie_anomaly", t.kie_anomaly);
    s.read("kappa_anomaly", t.kappa_anomaly);
    s.finish();
}

HyperSpace parse_space(const json& j, const std::string& path) {
    if (!j.is_object()) fail(ErrorKind::Specification, path + " must be an object");
    HyperSpace space;
    for (auto it = j.begin(); it != j.end(); ++it) {
        Section p(it.value(), path + "." + it.key());
        ParamRange r;
        r.name = it.key();
        Range lohi{};
        p.read_range("range", lohi);
        if (!p.has("range")) fail(ErrorKind::Specification, p.where("range") + " is required");
        r.lo = lohi.lo;
        r.hi = lohi.hi;
        std::string scale = "linear";
        p.read("scale", scale);
        r.scale = spec_guard([&] { return param_scale_from_string(scale); });
        p.finish();
        space.params.push_back(r);
    }
    return space;
}

}  // namespace

PipelineConfig parse_config(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Specification, std::string("config is not valid JSON: ") + e.what());
    }
    PipelineConfig c;
    Section root(doc, "");
    root.read("seed", c.seed);
    root.read("output_dir", c.output_dir);
    {
        auto s = root.child("kinetics");
        std::string mode(to_string(c.transmission));
        s.read("transmission", mode);
        c.transmission = spec_guard([&] { return transmission_mode_from_string(mode); });
        s.finish();
    }
    {
        auto s = root.child("catalog");
        s.read("n_systems", c.catalog.n_systems);
        s.read("anchors", c.catalog.anchors);
        s.read_range("v_forward_kjmol", c.catalog.v_forward_kjmol);
        s.read_range("eta", c.catalog.eta);
        s.read_range("omega_cm1", c.catalog.omega_cm1);
        s.read_range("zpe_shift_kjmol", c.catalog.zpe_shift_kjmol);
        s.read_range("prefactor_scale", c.catalog.prefactor_scale);
        s.finish();
    }
    {
        auto s = root.child("grid");
        s.read("t_min", c.grid.t_min);
        s.read("t_max", c.grid.t_max);
        s.read("raw_step", c.grid.raw_step);
        s.read("augment_step", c.grid.augment_step);
        s.read_range("fit_window", c.grid.fit_window);
        s.finish();
    }
    {
        auto s = root.child("dataset");
        std::string mode(to_string(c.dataset_mode));
        s.read("mode", mode);
        c.dataset_mode = spec_guard([&] { return dataset_mode_from_string(mode); });
        s.finish();
    }
    {
        auto s = root.child("model");
        if (const json* f = s.get("families")) {
            if (!f->is_array()) fail(ErrorKind::Specification, "model.families must be an array");
            c.model.families.clear();
            std::set<Family> seen;
            for (const auto& name : *f) {
                if (!name.is_string()) fail(ErrorKind::Specification, "model.families entries must be strings");
                const Family fam = family_from_string(name.get<std::string>());
                if (!seen.insert(fam).second) fail(ErrorKind::Specification, "duplicate family in model.families");
                c.model.families.push_back(fam);
            }
        }
        s.read("search_budget", c.model.search_budget);
        std::string strategy(to_string(c.model.strategy));
        s.read("strategy", strategy);
        c.model.strategy = search_strategy_from_string(strategy);
        std::string train_family(to_string(c.model.train_family));
        s.read("train_family", train_family);
        c.model.train_family = family_from_string(train_family);
        if (const json* sp = s.get("spaces")) {
            if (!sp->is_object()) fail(ErrorKind::Specification, "model.spaces must be an object");
            for (auto it = sp->begin(); it != sp->end(); ++it) {
                const Family fam = family_from_string(it.key());
                c.model.spaces[fam] = parse_space(it.value(), "model.spaces." + it.key());
                const auto known = default_hyperparameters(fam);
                for (const auto& p : c.model.spaces[fam].params) {
                    require(known.count(p.name) != 0, ErrorKind::Specification,
                            "model.spaces." + it.key() + " has unknown parameter '" + p.name + "'");
                }
            }
        }
        s.finish();
    }
    {
        auto s = root.child("split");
        s.read("kfold_k", c.split.kfold_k);
        s.read("test_fraction", c.split.test_fraction);
        s.read("loo", c.split.loo);
        s.finish();
    }
    {
        auto s = root.child("explain");
        s.read("n_rows", c.explain.n_rows);
        s.read("background", c.explain.background);
        s.finish();
    }
    {
        auto s = root.child("phase");
        s.read("panel_temperatures", c.phase.panel_temperatures);
        parse_thresholds(s.child("thresholds"), c.phase.thresholds);
        s.finish();
    }
    root.finish();
    c.validate();
    return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        fail(ErrorKind::Usage, "config file '" + path.string() + "' not found");
    }
    return parse_config(read_file(path));
}

std::string config_to_json(const PipelineConfig& c) {
    const auto range = [](const Range& r) { return json::array({r.lo, r.hi}); };
    json doc;
    doc["seed"] = c.seed;
    doc["output_dir"] = c.output_dir;
    doc["kinetics"] = {{"transmission", std::string(to_string(c.transmission))}};
    doc["catalog"] = {{"n_systems", c.catalog.n_systems},
                      {"anchors", c.catalog.anchors},
                      {"v_forward_kjmol", range(c.catalog.v_forward_kjmol)},
                      {"eta", range(c.catalog.eta)},
                      {"omega_cm1", range(c.catalog.omega_cm1)},
                      {"zpe_shift_kjmol", range(c.catalog.zpe_shift_kjmol)},
                      {"prefactor_scale", range(c.catalog.prefactor_scale)}};
    doc["grid"] = {{"t_min", c.grid.t_min},
                   {"t_max", c.grid.t_max},
                   {"raw_step", c.grid.raw_step},
                   {"augment_step", c.grid.augment_step},
                   {"fit_window", range(c.grid.fit_window)}};
    doc["dataset"] = {{"mode", std::string(to_string(c.dataset_mode))}};
    json families = json::array();
    for (Family f : c.model.families) families.push_back(std::string(to_string(f)));
    json spaces = json::object();
    for (const auto& [fam, space] : c.model.spaces) {
        json s = json::object();
        for (const auto& p : space.params) {
            s[p.name] = {{"range", json::array({p.lo, p.hi})}, {"scale", std::string(to_string(p.scale))}};
        }
        spaces[std::string(to_string(fam))] = s;
    }
    doc["model"] = {{"families", families},
                    {"search_budget", c.model.search_budget},
                    {"strategy", std::string(to_string(c.model.strategy))},
                    {"train_family", std::string(to_string(c.model.train_family))},
                    {"spaces", spaces}};
    doc["split"] = {{"kfold_k", c.split.kfold_k}, {"test_fraction", c.split.test_fraction}, {"loo", c.split.loo}};
    doc["explain"] = {{"n_rows", c.explain.n_rows}, {"background", c.explain.background}};
    const auto& t = c.phase.thresholds;
    doc["phase"] = {{"panel_temperatures", c.phase.panel_temperatures},
                    {"thresholds",
                     {{"kappa_strong", t.kappa_strong},
                      {"kappa_classical", t.kappa_classical},
                      {"T_low", t.T_low},
                      {"T_high", t.T_high},
                      {"k_low", t.k_low},
                      {"k_high", t.k_high},
                      {"kie_anomaly", t.kie_anomaly},
                      {"kappa_anomaly", t.kappa_anomaly}}}};
    return doc.dump(2) + "\n";
}

}  // namespace tunnelkit
