#include "tunnelkit/dataset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "json.hpp"
#include "tunnelkit/constants.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/parallel.hpp"
#include "tunnelkit/random.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

using nlohmann::ordered_json;

namespace {

struct AnchorParams {
    const char* id;
    const char* label;
    Site site;
    double v_forward_kjmol;
    double eta;
    double omega_cm1;
    double zpe_shift_kjmol;
    double prefactor_scale;
};

// NH2 pathways: more asymmetric, softer barriers, larger zero-point shift.
// COOH pathways: nearly symmetric, steep barriers. glu_nh2 is tuned so its
// k_tun(H) Arrhenius plot over 200-1000 K gives E_a ~ 84.1 kJ/mol and
// A ~ 6.4e7 s^-1.
constexpr AnchorParams kAnchors[] = {
    {"ala_cooh", "Ala-COOH", Site::COOH, 118.0, 0.10, 1500.0, 4.0, 1.0e-2},
    {"ala_nh2", "Ala-NH2", Site::NH2, 104.0, 0.38, 760.0, 6.2, 2.0e-4},
    {"ile_cooh", "Ile-COOH", Site::COOH, 124.0, 0.08, 1450.0, 3.6, 5.0e-2},
    {"ile_nh2", "Ile-NH2", Site::NH2, 98.0, 0.42, 820.0, 6.6, 1.0e-4},
    {"val_cooh", "Val-COOH", Site::COOH, 112.0, 0.12, 1380.0, 3.2, 2.0e-2},
    {"val_nh2", "Val-NH2", Site::NH2, 96.0, 0.35, 700.0, 6.8, 3.0e-4},
    {"glu_cooh", "Glu-COOH", Site::COOH, 130.0, 0.15, 1550.0, 4.5, 1.0e-1},
    {"glu_nh2", "Glu-NH2", Site::NH2, 82.6, 0.45, 650.0, 6.0, 3.11e-6},
};

ReactionSystem make_system(std::string id, std::string label, Site site, double v_forward_kjmol, double eta,
                           double omega_cm1, double zpe_kjmol, double prefactor_scale) {
    ReactionSystem s;
    s.id = std::move(id);
    s.label = std::move(label);
    s.site = site;
    s.mass_H = constants::mass_H_amu * constants::amu;
    s.mass_D = constants::mass_D_amu * constants::amu;
    s.barrier = make_eckart(v_forward_kjmol, v_forward_kjmol * (1.0 - eta), omega_cm1, constants::mass_H_amu);
    s.zpe_shift = zpe_kjmol * constants::kJmol_to_J;
    s.prefactor_scale = prefactor_scale;
    validate(s);
    return s;
}

void check_range(const Range& r, const char* name, double min_allowed) {
    require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi, ErrorKind::Specification,
            std::string("catalog range '") + name + "' is empty");
    require(r.lo >= min_allowed, ErrorKind::Specification,
            std::string("catalog range '") + name + "' has an invalid lower bound");
}

double to_kjmol(double joules) { return joules / constants::kJmol_to_J; }

void require_finite(double v, const std::string& what) {
    require(std::isfinite(v), ErrorKind::Data, what + " is not finite");
}

std::string_view to_string(RateKind kind) { return kind == RateKind::Tunneling ? "k_tun" : "k_cla"; }

RateKind rate_kind_from_string(std::string_view name) {
    if (name == "k_tun") return RateKind::Tunneling;
    if (name == "k_cla") return RateKind::Classical;
    fail(ErrorKind::Format, "unknown rate kind '" + std::string(name) + "'");
}

const ArrheniusFit& lookup(const FitTable& fits, const std::string& id, Isotope iso, RateKind kind) {
    const auto it = fits.find(FitKey{id, iso, kind});
    if (it == fits.end()) {
        fail(ErrorKind::Consistency, "missing " + std::string(to_string(kind)) + "(" +
                                         std::string(to_string(iso)) + ") fit for system " + id);
    }
    return it->second;
}

ArrheniusFit fit_linear(const std::vector<RatePointLog10>& points, bool with_exponent) {
    const std::size_t n_params = with_exponent ? 3 : 2;
    const std::size_t n_min = with_exponent ? 4 : 3;
    require(points.size() >= n_min, ErrorKind::Fitting,
            "Arrhenius fit needs at least " + std::to_string(n_min) + " points");
    std::set<double> distinct;
    for (const auto& p : points) {
        require(std::isfinite(p.T) && p.T > 0.0 && std::isfinite(p.log10_k), ErrorKind::Fitting,
                "Arrhenius fit input must be finite with T > 0");
        distinct.insert(p.T);
    }
    require(distinct.size() >= n_min, ErrorKind::Fitting, "Arrhenius fit needs distinct temperatures");

    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(n_params));
    Eigen::VectorXd target(n);
    // log10 k = log10 A + m log10 T - E_a / (R T ln 10), E_a in kJ/mol
    const double energy_factor = 1.0e3 / (constants::R * constants::ln10);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double T = points[static_cast<std::size_t>(i)].T;
        design(i, 0) = 1.0;
        Eigen::Index c = 1;
        if (with_exponent) design(i, c++) = std::log10(T);
        design(i, c) = -energy_factor / T;
        target(i) = points[static_cast<std::size_t>(i)].log10_k;
    }
    const Eigen::VectorXd scale = design.colwise().norm().transpose();
    const Eigen::MatrixXd scaled = design * scale.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-12);
    require(qr.rank() == static_cast<Eigen::Index>(n_params), ErrorKind::Fitting,
            "Arrhenius design matrix is rank deficient");
    const Eigen::VectorXd coef = qr.solve(target).cwiseQuotient(scale);
    const Eigen::VectorXd residual = design * coef - target;

    ArrheniusFit fit;
    fit.log10_A = coef(0);
    fit.m_exp = with_exponent ? coef(1) : 0.0;
    fit.E_a = coef(with_exponent ? 2 : 1);
    fit.residual_rmse = std::sqrt(residual.squaredNorm() / static_cast<double>(n));
    return fit;
}

}  // namespace

std::vector<ReactionSystem> anchor_systems() {
    std::vector<ReactionSystem> out;
    for (const auto& a : kAnchors) {
        out.push_back(make_system(a.id, a.label, a.site, a.v_forward_kjmol, a.eta, a.omega_cm1, a.zpe_shift_kjmol,
                                  a.prefactor_scale));
    }
    return out;
}

std::vector<ReactionSystem> build_catalog(const CatalogConfig& config, std::uint64_t seed) {
    require(config.n_systems >= 2, ErrorKind::Specification, "catalog needs at least 2 systems");
    check_range(config.v_forward_kjmol, "v_forward_kjmol", 1e-9);
    check_range(config.eta, "eta", 0.0);
    require(config.eta.hi < 1.0, ErrorKind::Specification, "catalog eta range must stay below 1");
    check_range(config.omega_cm1, "omega_cm1", 1e-9);
    check_range(config.zpe_shift_kjmol, "zpe_shift_kjmol", 0.0);
    check_range(config.prefactor_scale, "prefactor_scale", 1e-300);

    std::vector<ReactionSystem> catalog;
    const auto n = static_cast<std::size_t>(config.n_systems);
    if (config.anchors) {
        for (auto& s : anchor_systems()) {
            if (catalog.size() == n) break;
            catalog.push_back(std::move(s));
        }
    }
    Rng rng(seed);
    int index = 1;
    while (catalog.size() < n) {
        const double v = rng.uniform(config.v_forward_kjmol.lo, config.v_forward_kjmol.hi);
        const double eta = rng.uniform(config.eta.lo, config.eta.hi);
        const double omega = rng.uniform(config.omega_cm1.lo, config.omega_cm1.hi);
        const double zpe = rng.uniform(config.zpe_shift_kjmol.lo, config.zpe_shift_kjmol.hi);
        const double scale = rng.log_uniform(config.prefactor_scale.lo, config.prefactor_scale.hi);
        char id[32];
        std::snprintf(id, sizeof id, "syn_%02d", index);
        char label[32];
        std::snprintf(label, sizeof label, "SYNTH-%02d", index);
        catalog.push_back(make_system(id, label, Site::SYNTH, v, eta, omega, zpe, scale));
        ++index;
    }
    return catalog;
}

std::string catalog_to_json(const std::vector<ReactionSystem>& catalog) {
    ordered_json doc = ordered_json::array();
    for (const auto& s : catalog) {
        ordered_json barrier;
        barrier["shape"] = std::string(to_string(s.barrier.shape));
        barrier["v_forward"] = to_kjmol(s.barrier.v_forward);
        barrier["v_reverse"] = to_kjmol(s.barrier.v_reverse);
        barrier["omega_imag"] = s.barrier.omega_imag / constants::cm1_to_radps;
        barrier["width"] = s.barrier.width / constants::angstrom;
        barrier["reference_mass"] = s.barrier.reference_mass / constants::amu;
        barrier["eta"] = s.barrier.asymmetry();
        ordered_json rec;
        rec["id"] = s.id;
        rec["label"] = s.label;
        rec["site"] = std::string(to_string(s.site));
        rec["barrier"] = std::move(barrier);
        rec["mass_h"] = s.mass_H / constants::amu;
        rec["mass_d"] = s.mass_D / constants::amu;
        rec["zpe_shift"] = to_kjmol(s.zpe_shift);
        rec["prefactor_scale"] = s.prefactor_scale;
        doc.push_back(std::move(rec));
    }
    return doc.dump(2) + "\n";
}

std::vector<ReactionSystem> catalog_from_json(const std::string& text) {
    std::vector<ReactionSystem> out;
    try {
        const auto doc = ordered_json::parse(text);
        require(doc.is_array(), ErrorKind::Format, "catalog.json must be an array");
        for (const auto& rec : doc) {
            ReactionSystem s;
            s.id = rec.at("id").get<std::string>();
            s.label = rec.at("label").get<std::string>();
            s.site = site_from_string(rec.at("site").get<std::string>());
            const auto& b = rec.at("barrier");
            s.barrier.shape = barrier_shape_from_string(b.at("shape").get<std::string>());
            s.barrier.v_forward = b.at("v_forward").get<double>() * constants::kJmol_to_J;
            s.barrier.v_reverse = b.at("v_reverse").get<double>() * constants::kJmol_to_J;
            s.barrier.omega_imag = b.at("omega_imag").get<double>() * constants::cm1_to_radps;
            s.barrier.width = b.at("width").get<double>() * constants::angstrom;
            s.barrier.reference_mass = b.at("reference_mass").get<double>() * constants::amu;
            s.mass_H = rec.at("mass_h").get<double>() * constants::amu;
            s.mass_D = rec.at("mass_d").get<double>() * constants::amu;
            s.zpe_shift = rec.at("zpe_shift").get<double>() * constants::kJmol_to_J;
            s.prefactor_scale = rec.at("prefactor_scale").get<double>();
            validate(s);
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Format, std::string("malformed catalog.json: ") + e.what());
    }
    return out;
}

std::vector<RawRow> sweep(const std::vector<ReactionSystem>& catalog, const std::vector<double>& grid,
                          TransmissionMode mode) {
    validate_grid(grid);
    std::vector<const ReactionSystem*> order;
    for (const auto& s : catalog) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) { return a->id < b->id; });

    const std::size_t jobs = order.size() * 2;
    std::vector<std::vector<RatePoint>> curves(jobs);
    parallel_for(jobs, [&](std::size_t j) {
        const Isotope iso = j % 2 == 0 ? Isotope::H : Isotope::D;
        curves[j] = rate_curve(*order[j / 2], iso, grid, mode);
    });

    std::vector<RawRow> rows;
    rows.reserve(jobs * grid.size());
    for (std::size_t j = 0; j < jobs; ++j) {
        const Isotope iso = j % 2 == 0 ? Isotope::H : Isotope::D;
        for (const auto& p : curves[j]) {
            rows.push_back({order[j / 2]->id, iso, p.T, p.log10_k_cla, p.log10_kappa, p.log10_k_tun});
        }
    }
    return rows;
}

std::string raw_curves_to_csv(const std::vector<RawRow>& rows) {
    constexpr std::string_view header[] = {"system_id", "isotope", "T_K", "log10_k_cla", "log10_kappa",
                                           "log10_k_tun"};
    CsvWriter w(header);
    for (const auto& r : rows) {
        w.field(r.system_id).field(to_string(r.isotope)).field(r.T).field(r.log10_k_cla).field(r.log10_kappa)
            .field(r.log10_k_tun);
        w.end_row();
    }
    return w.str();
}

std::vector<RawRow> raw_curves_from_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const auto c_id = t.column("system_id"), c_iso = t.column("isotope"), c_T = t.column("T_K"),
               c_cla = t.column("log10_k_cla"), c_kap = t.column("log10_kappa"), c_tun = t.column("log10_k_tun");
    std::vector<RawRow> rows;
    rows.reserve(t.rows.size());
    for (const auto& f : t.rows) {
        rows.push_back({f[c_id], isotope_from_string(f[c_iso]), parse_double(f[c_T]), parse_double(f[c_cla]),
                        parse_double(f[c_kap]), parse_double(f[c_tun])});
    }
    return rows;
}

double ArrheniusFit::log10_rate(double T) const {
    return log10_A + m_exp * std::log10(T) - E_a * 1.0e3 / (constants::R * T * constants::ln10);
}

ArrheniusFit fit_arrhenius3(const std::vector<RatePointLog10>& points) { return fit_linear(points, true); }

ArrheniusFit fit_arrhenius2(const std::vector<RatePointLog10>& points) { return fit_linear(points, false); }

FitTable fit_curves(const std::vector<RawRow>& rows, double window_lo, double window_hi) {
    require(window_lo < window_hi, ErrorKind::Specification, "fit window must satisfy lo < hi");
    std::map<FitKey, std::vector<RatePointLog10>> series;
    for (const auto& r : rows) {
        if (r.T < window_lo || r.T > window_hi) continue;
        series[FitKey{r.system_id, r.isotope, RateKind::Tunneling}].push_back({r.T, r.log10_k_tun});
        if (r.isotope == Isotope::H) {
            series[FitKey{r.system_id, r.isotope, RateKind::Classical}].push_back({r.T, r.log10_k_cla});
        }
    }
    std::vector<std::pair<FitKey, std::vector<RatePointLog10>>> items(series.begin(), series.end());
    std::vector<ArrheniusFit> fits(items.size());
    parallel_for(items.size(), [&](std::size_t i) { fits[i] = fit_arrhenius3(items[i].second); });
    FitTable table;
    for (std::size_t i = 0; i < items.size(); ++i) table.emplace(items[i].first, fits[i]);
    return table;
}

std::string fits_to_csv(const FitTable& fits) {
    constexpr std::string_view header[] = {"system_id", "isotope", "kind", "log10_A", "m_exp", "E_a_kJmol",
                                           "residual_rmse"};
    CsvWriter w(header);
    for (const auto& [key, fit] : fits) {
        w.field(key.system_id).field(to_string(key.isotope)).field(to_string(key.kind)).field(fit.log10_A)
            .field(fit.m_exp).field(fit.E_a).field(fit.residual_rmse);
        w.end_row();
    }
    return w.str();
}

FitTable fits_from_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const auto c_id = t.column("system_id"), c_iso = t.column("isotope"), c_kind = t.column("kind"),
               c_a = t.column("log10_A"), c_m = t.column("m_exp"), c_e = t.column("E_a_kJmol"),
               c_r = t.column("residual_rmse");
    FitTable table;
    for (const auto& f : t.rows) {
        ArrheniusFit fit{parse_double(f[c_a]), parse_double(f[c_m]), parse_double(f[c_e]), parse_double(f[c_r])};
        table.emplace(FitKey{f[c_id], isotope_from_string(f[c_iso]), rate_kind_from_string(f[c_kind])}, fit);
    }
    return table;
}

std::vector<DenseRow> augment(const FitTable& fits, const std::vector<std::string>& system_ids, double t_min,
                              double t_max, double step) {
    require(t_min < t_max && step > 0.0, ErrorKind::Specification, "augment needs t_min < t_max and step > 0");
    const std::vector<double> grid = temperature_grid(t_min, t_max, step);
    std::vector<std::string> ids = system_ids;
    std::sort(ids.begin(), ids.end());
    std::vector<DenseRow> out;
    out.reserve(ids.size() * grid.size());
    for (const auto& id : ids) {
        const ArrheniusFit& tun_h = lookup(fits, id, Isotope::H, RateKind::Tunneling);
        const ArrheniusFit& tun_d = lookup(fits, id, Isotope::D, RateKind::Tunneling);
        const ArrheniusFit& cla_h = lookup(fits, id, Isotope::H, RateKind::Classical);
        for (double T : grid) {
            DenseRow r;
            r.system_id = id;
            r.T = T;
            r.log10_k_tun_H = tun_h.log10_rate(T);
            r.log10_k_tun_D = tun_d.log10_rate(T);
            r.log10_k_cla_H = cla_h.log10_rate(T);
            r.log10_kie = r.log10_k_tun_H - r.log10_k_tun_D;
            r.log10_kappa = r.log10_k_tun_H - r.log10_k_cla_H;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<DenseRow> direct_curves(const std::vector<ReactionSystem>& catalog, double t_min, double t_max,
                                    double step, TransmissionMode mode) {
    require(t_min < t_max && step > 0.0, ErrorKind::Specification, "direct curves need t_min < t_max and step > 0");
    const std::vector<double> grid = temperature_grid(t_min, t_max, step);
    const std::vector<RawRow> raw = sweep(catalog, grid, mode);
    // raw is sorted by (id, H<D, T): H block then D block per system
    std::vector<DenseRow> out;
    const std::size_t per_system = 2 * grid.size();
    out.reserve(raw.size() / 2);
    for (std::size_t base = 0; base < raw.size(); base += per_system) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const RawRow& h = raw[base + i];
            const RawRow& d = raw[base + grid.size() + i];
            DenseRow r;
            r.system_id = h.system_id;
            r.T = h.T;
            r.log10_k_tun_H = h.log10_k_tun;
            r.log10_k_tun_D = d.log10_k_tun;
            r.log10_k_cla_H = h.log10_k_cla;
            r.log10_kie = h.log10_k_tun - d.log10_k_tun;
            r.log10_kappa = h.log10_k_tun - h.log10_k_cla;
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::string_view to_string(DatasetMode mode) noexcept {
    return mode == DatasetMode::Arrhenius ? "arrhenius" : "direct";
}

DatasetMode dataset_mode_from_string(std::string_view name) {
    if (name == "arrhenius") return DatasetMode::Arrhenius;
    if (name == "direct") return DatasetMode::Direct;
    fail(ErrorKind::Specification, "unknown dataset mode '" + std::string(name) + "'");
}

std::vector<DatasetRecord> assemble(const std::vector<DenseRow>& dense, const std::vector<ReactionSystem>& catalog) {
    std::map<std::string, double> eta;
    for (const auto& s : catalog) eta[s.id] = s.barrier.asymmetry();
    std::vector<DatasetRecord> out;
    out.reserve(dense.size());
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const DenseRow& r = dense[i];
        const auto it = eta.find(r.system_id);
        require(it != eta.end(), ErrorKind::Consistency, "dense row for unknown system " + r.system_id);
        DatasetRecord rec{r.system_id, r.T, r.log10_kie, r.log10_k_tun_H, it->second, r.log10_kappa};
        const std::string where = "dataset row " + std::to_string(i) + " (" + r.system_id + ", T=" +
                                  format_double(r.T) + ")";
        require_finite(rec.T, where + " T");
        require_finite(rec.log10_kie, where + " log10_kie");
        require_finite(rec.log10_k_tun, where + " log10_k_tun");
        require_finite(rec.eta, where + " eta");
        require_finite(rec.log10_kappa, where + " log10_kappa");
        out.push_back(std::move(rec));
    }
    return out;
}

std::string dataset_to_csv(const std::vector<DatasetRecord>& records) {
    constexpr std::string_view header[] = {"system_id", "T_K", "log10_kie", "log10_k_tun", "eta", "log10_kappa"};
    CsvWriter w(header);
    for (const auto& r : records) {
        w.field(r.system_id).field(r.T).field(r.log10_kie).field(r.log10_k_tun).field(r.eta).field(r.log10_kappa);
        w.end_row();
    }
    return w.str();
}

std::vector<DatasetRecord> dataset_from_csv(const std::string& text) {
    const CsvTable t = parse_csv(text);
    const auto c_id = t.column("system_id"), c_T = t.column("T_K"), c_kie = t.column("log10_kie"),
               c_tun = t.column("log10_k_tun"), c_eta = t.column("eta"), c_kap = t.column("log10_kappa");
    std::vector<DatasetRecord> out;
    out.reserve(t.rows.size());
    for (const auto& f : t.rows) {
        out.push_back({f[c_id], parse_double(f[c_T]), parse_double(f[c_kie]), parse_double(f[c_tun]),
                       parse_double(f[c_eta]), parse_double(f[c_kap])});
    }
    return out;
}

}  // namespace tunnelkit
