#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tunnelkit/dataset.hpp"

namespace tunnelkit {

enum class Regime { Tunneling, Transition, Classical };

std::string_view to_string(Regime regime) noexcept;

// Linear-scale thresholds; comparisons are made in log10.
struct RegimeThresholds {
    double kappa_strong = 2.0;
    double kappa_classical = 1.1;
    double T_low = 300.0;
    double T_high = 600.0;
    double k_low = 1e-5;
    double k_high = 1.0;
    double kie_anomaly = 5.0;
    double kappa_anomaly = 1.5;

    // Throws Specification unless kappa_strong > kappa_classical >= 1,
    // T_low < T_high and k_low < k_high.
    void validate() const;
};

struct PhasePoint {
    std::string system_id;
    double T = 0.0;
    double log10_kie = 0.0;
    double log10_kappa = 0.0;
    double log10_k_tun = 0.0;
    double eta = 0.0;
    Regime regime = Regime::Transition;
    bool anomaly = false;
};

// Tunneling: T < T_low, kappa >= kappa_strong, k_tun < k_low.
// Classical: T > T_high, kappa <= kappa_classical, k_tun > k_high.
// Anomaly (independent of regime): KIE >= kie_anomaly and kappa <= kappa_anomaly.
PhasePoint classify(const DatasetRecord& record, const RegimeThresholds& thresholds);

struct PhasePanel {
    double T = 0.0;
    std::vector<PhasePoint> points;  // dataset order

    std::array<std::size_t, 3> regime_counts() const;  // Tunneling, Transition, Classical
    std::size_t anomaly_count() const;
    double median_log10_kappa() const;
};

// Panels in ascending temperature. Throws Specification when a requested
// temperature has no record (matched to 1e-9 K).
std::vector<PhasePanel> build_diagram(const std::vector<DatasetRecord>& records, std::vector<double> panel_temperatures,
                                      const RegimeThresholds& thresholds);

// panel_T,system_id,log10_kie,log10_kappa,log10_k_tun,eta,regime,anomaly
std::string phase_to_csv(const std::vector<PhasePanel>& panels);

// Per-panel regime and anomaly counts as JSON.
std::string phase_summary_json(const std::vector<PhasePanel>& panels);

struct AxisRange {
    double lo = 0.0;
    double hi = 1.0;
};

struct SvgStyle {
    double width = 480.0;
    double height = 400.0;
    double margin_left = 64.0;
    double margin_right = 20.0;
    double margin_top = 36.0;
    double margin_bottom = 52.0;
    double marker_radius = 4.0;
    // Shared across panels; fitted to the data (plus guide lines) when unset.
    std::optional<AxisRange> x_range;
    std::optional<AxisRange> y_range;
};

// Axis ranges the renderer would use: data extent and threshold guides, padded
// by 5% on each side.
std::pair<AxisRange, AxisRange> default_axes(const std::vector<PhasePanel>& panels, const RegimeThresholds& thresholds);

// One SVG document per panel: log10 KIE on x, log10 kappa on y.
std::vector<std::string> render_svg(const std::vector<PhasePanel>& panels, const RegimeThresholds& thresholds,
                                    const SvgStyle& style = {});

}  // namespace tunnelkit
