#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tunnelkit/kinetics.hpp"
#include "tunnelkit/reaction.hpp"

namespace tunnelkit {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};

// Parameter ranges for the synthetic systems, external units.
struct CatalogConfig {
    int n_systems = 20;
    bool anchors = true;
    Range v_forward_kjmol{60.0, 140.0};
    Range eta{0.0, 0.5};
    Range omega_cm1{600.0, 1600.0};
    Range zpe_shift_kjmol{2.0, 7.0};
    Range prefactor_scale{1e-6, 1.0};  // sampled log-uniformly
};

// The eight named amino-acid systems (Ala, Ile, Val, Glu x COOH, NH2).
std::vector<ReactionSystem> anchor_systems();

// Anchors first (when enabled), then seeded SYNTH draws up to n_systems.
std::vector<ReactionSystem> build_catalog(const CatalogConfig& config, std::uint64_t seed);

// catalog.json: array of systems in kJ/mol, cm^-1, amu, angstrom.
std::string catalog_to_json(const std::vector<ReactionSystem>& catalog);
std::vector<ReactionSystem> catalog_from_json(const std::string& text);

struct RawRow {
    std::string system_id;
    Isotope isotope = Isotope::H;
    double T = 0.0;
    double log10_k_cla = 0.0;
    double log10_kappa = 0.0;
    double log10_k_tun = 0.0;
};

// One rate curve per (system, isotope); rows sorted by (system_id, H < D, T).
std::vector<RawRow> sweep(const std::vector<ReactionSystem>& catalog, const std::vector<double>& grid,
                          TransmissionMode mode);

std::string raw_curves_to_csv(const std::vector<RawRow>& rows);
std::vector<RawRow> raw_curves_from_csv(const std::string& text);

// k = A T^m exp(-E_a / R T), stored as log10 A, m, E_a in kJ/mol.
struct ArrheniusFit {
    double log10_A = 0.0;
    double m_exp = 0.0;
    double E_a = 0.0;            // kJ/mol
    double residual_rmse = 0.0;  // log10 units

    double log10_rate(double T) const;
};

struct RatePointLog10 {
    double T = 0.0;
    double log10_k = 0.0;
};

// Linear least squares in (log10 A, m, E_a) with column scaling and a
// rank-revealing QR. Needs at least four distinct temperatures.
ArrheniusFit fit_arrhenius3(const std::vector<RatePointLog10>& points);

// Two-parameter form (m = 0), the slope/intercept of a log k vs 1/T plot.
ArrheniusFit fit_arrhenius2(const std::vector<RatePointLog10>& points);

enum class RateKind { Tunneling, Classical };

struct FitKey {
    std::string system_id;
    Isotope isotope = Isotope::H;
    RateKind kind = RateKind::Tunneling;
    auto operator<=>(const FitKey&) const = default;
};

using FitTable = std::map<FitKey, ArrheniusFit>;

// Fits k_tun(H), k_tun(D) and k_cla(H) per system on raw rows inside the window.
FitTable fit_curves(const std::vector<RawRow>& rows, double window_lo, double window_hi);

std::string fits_to_csv(const FitTable& fits);
FitTable fits_from_csv(const std::string& text);

// Dense per-system columns on a regular grid.
struct DenseRow {
    std::string system_id;
    double T = 0.0;
    double log10_k_tun_H = 0.0;
    double log10_k_tun_D = 0.0;
    double log10_k_cla_H = 0.0;
    double log10_kie = 0.0;    // k_tun_H - k_tun_D
    double log10_kappa = 0.0;  // k_tun_H - k_cla_H
};

// Regenerates the three fitted columns on [t_min, t_max] every `step` K.
std::vector<DenseRow> augment(const FitTable& fits, const std::vector<std::string>& system_ids, double t_min,
                              double t_max, double step);

// Same columns from the quadrature at every dense temperature (no fitting).
std::vector<DenseRow> direct_curves(const std::vector<ReactionSystem>& catalog, double t_min, double t_max,
                                    double step, TransmissionMode mode);

enum class DatasetMode { Arrhenius, Direct };
std::string_view to_string(DatasetMode mode) noexcept;
DatasetMode dataset_mode_from_string(std::string_view name);

struct DatasetRecord {
    std::string system_id;
    double T = 0.0;
    double log10_kie = 0.0;
    double log10_k_tun = 0.0;
    double eta = 0.0;
    double log10_kappa = 0.0;
};

// One record per dense row, eta taken from the catalog. Throws Data naming the
// first non-finite row.
std::vector<DatasetRecord> assemble(const std::vector<DenseRow>& dense, const std::vector<ReactionSystem>& catalog);

std::string dataset_to_csv(const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> dataset_from_csv(const std::string& text);

}  // namespace tunnelkit
