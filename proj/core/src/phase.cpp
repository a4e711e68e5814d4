#include "tunnelkit/phase.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "tunnelkit/errors.hpp"
#include "tunnelkit/table_io.hpp"

namespace tunnelkit {

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
        case Regime::Tunneling:
            return "tunneling";
        case Regime::Transition:
            return "transition";
        case Regime::Classical:
            return "classical";
    }
    return "unknown";
}

void RegimeThresholds::validate() const {
    require(kappa_strong > kappa_classical && kappa_classical >= 1.0, ErrorKind::Specification,
            "thresholds need kappa_strong > kappa_classical >= 1");
    require(T_low < T_high, ErrorKind::Specification, "thresholds need T_low < T_high");
    require(k_low > 0.0 && k_low < k_high, ErrorKind::Specification, "thresholds need 0 < k_low < k_high");
    require(kie_anomaly > 0.0 && kappa_anomaly > 0.0, ErrorKind::Specification, "anomaly thresholds must be positive");
}

PhasePoint classify(const DatasetRecord& r, const RegimeThresholds& th) {
    PhasePoint p{r.system_id, r.T, r.log10_kie, r.log10_kappa, r.log10_k_tun, r.eta, Regime::Transition, false};
    if (r.T < th.T_low && r.log10_kappa >= std::log10(th.kappa_strong) && r.log10_k_tun < std::log10(th.k_low)) {
        p.regime = Regime::Tunneling;
    } else if (r.T > th.T_high && r.log10_kappa <= std::log10(th.kappa_classical) &&
               r.log10_k_tun > std::log10(th.k_high)) {
        p.regime = Regime::Classical;
    }
    p.anomaly = r.log10_kie >= std::log10(th.kie_anomaly) && r.log10_kappa <= std::log10(th.kappa_anomaly);
    return p;
}

std::array<std::size_t, 3> PhasePanel::regime_counts() const {
    std::array<std::size_t, 3> c{};
    for (const auto& p : points) ++c[static_cast<std::size_t>(p.regime)];
    return c;
}

std::size_t PhasePanel::anomaly_count() const {
    return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](const PhasePoint& p) { return p.anomaly; }));
}

double PhasePanel::median_log10_kappa() const {
    require(!points.empty(), ErrorKind::Specification, "median of an empty panel");
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.log10_kappa);
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<PhasePanel> build_diagram(const std::vector<DatasetRecord>& records, std::vector<double> temps,
                                      const RegimeThresholds& thresholds) {
    thresholds.validate();
    require(!temps.empty(), ErrorKind::Specification, "no panel temperatures requested");
    std::sort(temps.begin(), temps.end());
    std::vector<PhasePanel> panels;
    for (double T : temps) {
        PhasePanel panel;
        panel.T = T;
        for (const auto& r : records) {
            if (std::abs(r.T - T) <= 1e-9) panel.points.push_back(classify(r, thresholds));
        }
        if (panel.points.empty()) {
            fail(ErrorKind::Specification, "panel temperature " + format_double(T) + " K is not on the dataset grid");
        }
        panels.push_back(std::move(panel));
    }
    return panels;
}

std::string phase_to_csv(const std::vector<PhasePanel>& panels) {
    static constexpr std::string_view header[] = {"panel_T", "system_id", "log10_kie", "log10_kappa",
                                                  "log10_k_tun", "eta",       "regime",    "anomaly"};
    CsvWriter w(header);
    for (const auto& panel : panels) {
        for (const auto& p : panel.points) {
            w.field(panel.T)
                .field(p.system_id)
                .field(p.log10_kie)
                .field(p.log10_kappa)
                .field(p.log10_k_tun)
                .field(p.eta)
                .field(to_string(p.regime))
                .field(p.anomaly ? "true" : "false");
            w.end_row();
        }
    }
    return w.str();
}

std::string phase_summary_json(const std::vector<PhasePanel>& panels) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& panel : panels) {
        const auto c = panel.regime_counts();
        doc.push_back({{"panel_T", panel.T},
                       {"points", panel.points.size()},
                       {"tunneling", c[0]},
                       {"transition", c[1]},
                       {"classical", c[2]},
                       {"anomalies", panel.anomaly_count()},
                       {"median_log10_kappa", panel.median_log10_kappa()}});
    }
    return doc.dump(2) + "\n";
}

std::pair<AxisRange, AxisRange> default_axes(const std::vector<PhasePanel>& panels, const RegimeThresholds& th) {
    double xlo = std::log10(th.kie_anomaly), xhi = xlo;
    double ylo = 0.0, yhi = std::log10(th.kappa_strong);
    for (const auto& panel : panels) {
        for (const auto& p : panel.points) {
            xlo = std::min(xlo, p.log10_kie);
            xhi = std::max(xhi, p.log10_kie);
            ylo = std::min(ylo, p.log10_kappa);
            yhi = std::max(yhi, p.log10_kappa);
        }
    }
    const double px = 0.05 * std::max(xhi - xlo, 1e-3);
    const double py = 0.05 * std::max(yhi - ylo, 1e-3);
    return {{xlo - px, xhi + px}, {ylo - py, yhi + py}};
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    if (std::string_view(buf) == "-0.00") return "0.00";
    return buf;
}

// Step from {1, 2, 5} x 10^k giving about five intervals.
double tick_step(double span) {
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double f = raw / mag;
    return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
}

std::string tick_label(double v, double step) {
    char buf[32];
    const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos) s = "0";
    return s;
}

constexpr const char* kRegimeColor[] = {"#2b6cb0", "#dd6b20", "#2f855a"};

class Canvas {
public:
    Canvas(const SvgStyle& st, AxisRange xr, AxisRange yr) : st_(st), xr_(xr), yr_(yr) {
        x0_ = st.margin_left;
        x1_ = st.width - st.margin_right;
        y0_ = st.height - st.margin_bottom;
        y1_ = st.margin_top;
    }
    double px(double x) const { return x0_ + (x - xr_.lo) / (xr_.hi - xr_.lo) * (x1_ - x0_); }
    double py(double y) const { return y0_ + (y - yr_.lo) / (yr_.hi - yr_.lo) * (y1_ - y0_); }
    double left() const { return x0_; }
    double right() const { return x1_; }
    double bottom() const { return y0_; }
    double top() const { return y1_; }

private:
    SvgStyle st_;
    AxisRange xr_, yr_;
    double x0_, x1_, y0_, y1_;
};

std::string render_one(const PhasePanel& panel, const RegimeThresholds& th, const SvgStyle& st, AxisRange xr,
                       AxisRange yr) {
    const Canvas c(st, xr, yr);
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(st.width) + "\" height=\"" + num(st.height) +
         "\" viewBox=\"0 0 " + num(st.width) + " " + num(st.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(0.5 * (c.left() + c.right())) + "\" y=\"" + num(st.margin_top - 14.0) +
         "\" text-anchor=\"middle\" font-size=\"14\">T = " + format_double(panel.T) + " K</text>\n";
    s += "<rect x=\"" + num(c.left()) + "\" y=\"" + num(c.top()) + "\" width=\"" + num(c.right() - c.left()) +
         "\" height=\"" + num(c.bottom() - c.top()) + "\" fill=\"none\" stroke=\"black\"/>\n";

    const double xs = tick_step(xr.hi - xr.lo);
    for (double t = std::ceil(xr.lo / xs) * xs; t <= xr.hi + 1e-12; t += xs) {
        s += "<line x1=\"" + num(c.px(t)) + "\" y1=\"" + num(c.bottom()) + "\" x2=\"" + num(c.px(t)) + "\" y2=\"" +
             num(c.bottom() + 5.0) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(c.px(t)) + "\" y=\"" + num(c.bottom() + 18.0) + "\" text-anchor=\"middle\">" +
             tick_label(t, xs) + "</text>\n";
    }
    const double ys = tick_step(yr.hi - yr.lo);
    for (double t = std::ceil(yr.lo / ys) * ys; t <= yr.hi + 1e-12; t += ys) {
        s += "<line x1=\"" + num(c.left() - 5.0) + "\" y1=\"" + num(c.py(t)) + "\" x2=\"" + num(c.left()) + "\" y2=\"" +
             num(c.py(t)) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(c.left() - 8.0) + "\" y=\"" + num(c.py(t) + 4.0) + "\" text-anchor=\"end\">" +
             tick_label(t, ys) + "</text>\n";
    }
    s += "<text x=\"" + num(0.5 * (c.left() + c.right())) + "\" y=\"" + num(st.height - 12.0) +
         "\" text-anchor=\"middle\">log10 KIE</text>\n";
    s += "<text x=\"16\" y=\"" + num(0.5 * (c.top() + c.bottom())) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(0.5 * (c.top() + c.bottom())) + ")\">log10 &#954;</text>\n";

    // guides: anomaly KIE, and the kappa thresholds
    const auto vguide = [&](double x, const char* dash) {
        if (x < xr.lo || x > xr.hi) return;
        s += "<line x1=\"" + num(c.px(x)) + "\" y1=\"" + num(c.top()) + "\" x2=\"" + num(c.px(x)) + "\" y2=\"" +
             num(c.bottom()) + "\" stroke=\"#888888\" stroke-dasharray=\"" + dash + "\"/>\n";
    };
    const auto hguide = [&](double y, const char* dash) {
        if (y < yr.lo || y > yr.hi) return;
        s += "<line x1=\"" + num(c.left()) + "\" y1=\"" + num(c.py(y)) + "\" x2=\"" + num(c.right()) + "\" y2=\"" +
             num(c.py(y)) + "\" stroke=\"#888888\" stroke-dasharray=\"" + dash + "\"/>\n";
    };
    vguide(std::log10(th.kie_anomaly), "2 3");
    hguide(std::log10(th.kappa_anomaly), "2 3");
    hguide(std::log10(th.kappa_strong), "6 3");
    hguide(std::log10(th.kappa_classical), "6 3");

    for (const auto& p : panel.points) {
        s += "<circle cx=\"" + num(c.px(p.log10_kie)) + "\" cy=\"" + num(c.py(p.log10_kappa)) + "\" r=\"" +
             num(st.marker_radius) + "\" fill=\"" + kRegimeColor[static_cast<int>(p.regime)] + "\"";
        s += p.anomaly ? " stroke=\"black\" stroke-width=\"1.5\"" : " stroke=\"none\"";
        s += "><title>" + p.system_id + "</title></circle>\n";
    }

    // legend
    const Regime regimes[] = {Regime::Tunneling, Regime::Transition, Regime::Classical};
    double ly = c.top() + 14.0;
    for (Regime r : regimes) {
        s += "<circle cx=\"" + num(c.right() - 90.0) + "\" cy=\"" + num(ly - 4.0) + "\" r=\"4.00\" fill=\"" +
             kRegimeColor[static_cast<int>(r)] + "\"/>\n";
        s += "<text x=\"" + num(c.right() - 82.0) + "\" y=\"" + num(ly) + "\">" + std::string(to_string(r)) +
             "</text>\n";
        ly += 15.0;
    }
    s += "</svg>\n";
    return s;
}

}  // namespace

std::vector<std::string> render_svg(const std::vector<PhasePanel>& panels, const RegimeThresholds& thresholds,
                                    const SvgStyle& style) {
    require(!panels.empty(), ErrorKind::Specification, "nothing to render: no panels");
    const auto [dx, dy] = default_axes(panels, thresholds);
    const AxisRange xr = style.x_range.value_or(dx);
    const AxisRange yr = style.y_range.value_or(dy);
    require(xr.lo < xr.hi && yr.lo < yr.hi, ErrorKind::Specification, "axis ranges need lo < hi");
    std::vector<std::string> out;
    for (const auto& panel : panels) out.push_back(render_one(panel, thresholds, style, xr, yr));
    return out;
}

}  // namespace tunnelkit
