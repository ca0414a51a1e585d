#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "offsetcate/experiments.hpp"

// Small self-contained SVG writer: line charts with shaded bands and contour
// charts from a regular grid. No external plotting dependency.
namespace offsetcate::svg {

struct Series {
    std::string label;
    std::string color = "#2266aa";
    bool dashed = false;
    std::vector<std::array<double, 2>> points;  // (x, y)
};

// Vertical band in data coordinates, e.g. "better than baseline here".
struct Band {
    double x0 = 0.0;
    double x1 = 0.0;
};

struct Marker {
    double x = 0.0;
    double y = 0.0;
    std::string label;
    std::string color = "#000000";
};

namespace detail {

inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Frame {
    double width = 760.0, height = 520.0;
    double left = 70.0, right = 30.0, top = 40.0, bottom = 55.0;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;

    double px(double x) const {
        return left + (x - x_min) / (x_max - x_min) * (width - left - right);
    }
    double py(double y) const {
        return height - bottom - (y - y_min) / (y_max - y_min) * (height - top - bottom);
    }
};

// Round the step to a 1/2/5 ladder so tick labels come out clean.
inline double nice_step(double range, int target_ticks) {
    if (!(range > 0.0)) return 1.0;
    const double raw = range / target_ticks;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    double step = 10.0;
    if (r <= 1.0) step = 1.0;
    else if (r <= 2.0) step = 2.0;
    else if (r <= 5.0) step = 5.0;
    return step * mag;
}

inline void axes(std::string& out, const Frame& f, const std::string& title,
                 const std::string& x_label, const std::string& y_label) {
    out += "<rect x='" + num(f.left) + "' y='" + num(f.top) + "' width='" +
           num(f.width - f.left - f.right) + "' height='" +
           num(f.height - f.top - f.bottom) +
           "' fill='none' stroke='#333333' stroke-width='1'/>\n";
    out += "<text x='" + num(f.width / 2) +
           "' y='22' text-anchor='middle' font-size='15'>" + title + "</text>\n";
    out += "<text x='" + num((f.left + f.width - f.right) / 2) + "' y='" +
           num(f.height - 12) + "' text-anchor='middle' font-size='13'>" + x_label +
           "</text>\n";
    out += "<text x='16' y='" + num((f.top + f.height - f.bottom) / 2) +
           "' text-anchor='middle' font-size='13' transform='rotate(-90 16 " +
           num((f.top + f.height - f.bottom) / 2) + ")'>" + y_label + "</text>\n";

    const double xs = nice_step(f.x_max - f.x_min, 6);
    for (double v = std::ceil(f.x_min / xs) * xs; v <= f.x_max + 1e-9 * xs; v += xs) {
        const double p = f.px(v);
        out += "<line x1='" + num(p) + "' y1='" + num(f.height - f.bottom) + "' x2='" +
               num(p) + "' y2='" + num(f.height - f.bottom + 5) +
               "' stroke='#333333'/>\n";
        out += "<text x='" + num(p) + "' y='" + num(f.height - f.bottom + 18) +
               "' text-anchor='middle' font-size='11'>" + num(v) + "</text>\n";
    }
    const double ys = nice_step(f.y_max - f.y_min, 6);
    for (double v = std::ceil(f.y_min / ys) * ys; v <= f.y_max + 1e-9 * ys; v += ys) {
        const double p = f.py(v);
        out += "<line x1='" + num(f.left - 5) + "' y1='" + num(p) + "' x2='" +
               num(f.left) + "' y2='" + num(p) + "' stroke='#333333'/>\n";
        out += "<text x='" + num(f.left - 8) + "' y='" + num(p + 4) +
               "' text-anchor='end' font-size='11'>" + num(v) + "</text>\n";
    }
}

inline std::string header(double w, double h) {
    return "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(w) + "' height='" +
           num(h) + "' viewBox='0 0 " + num(w) + " " + num(h) +
           "'>\n<rect width='100%' height='100%' fill='white'/>\n";
}

}  // namespace detail

inline std::string line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<Series>& series,
                              const std::vector<Band>& bands = {}) {
    detail::Frame f;
    bool any = false;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            if (!any) {
                f.x_min = f.x_max = p[0];
                f.y_min = f.y_max = p[1];
                any = true;
            }
            f.x_min = std::min(f.x_min, p[0]);
            f.x_max = std::max(f.x_max, p[0]);
            f.y_min = std::min(f.y_min, p[1]);
            f.y_max = std::max(f.y_max, p[1]);
        }
    }
    if (!any) {
        f.x_min = 0.0;
        f.x_max = 1.0;
    }
    if (f.y_min > 0.0) f.y_min = 0.0;  // PEHE charts read best anchored at zero
    if (f.x_max == f.x_min) f.x_max = f.x_min + 1.0;
    if (f.y_max == f.y_min) f.y_max = f.y_min + 1.0;
    f.y_max += 0.06 * (f.y_max - f.y_min);

    std::string out = detail::header(f.width, f.height);
    for (const auto& b : bands) {
        const double x0 = std::clamp(b.x0, f.x_min, f.x_max);
        const double x1 = std::clamp(b.x1, f.x_min, f.x_max);
        if (!(x1 > x0)) continue;
        out += "<rect x='" + detail::num(f.px(x0)) + "' y='" + detail::num(f.top) +
               "' width='" + detail::num(f.px(x1) - f.px(x0)) + "' height='" +
               detail::num(f.height - f.top - f.bottom) +
               "' fill='#88cc88' fill-opacity='0.25'/>\n";
    }
    detail::axes(out, f, title, x_label, y_label);
    for (const auto& s : series) {
        if (s.points.empty()) continue;
        out += "<polyline fill='none' stroke='" + s.color + "' stroke-width='1.8'";
        if (s.dashed) out += " stroke-dasharray='6 4'";
        out += " points='";
        for (const auto& p : s.points) {
            out += detail::num(f.px(p[0])) + "," + detail::num(f.py(p[1])) + " ";
        }
        out += "'/>\n";
    }
    double ly = f.top + 14.0;
    for (const auto& s : series) {
        const double lx = f.width - f.right - 190.0;
        out += "<line x1='" + detail::num(lx) + "' y1='" + detail::num(ly - 4) +
               "' x2='" + detail::num(lx + 26) + "' y2='" + detail::num(ly - 4) +
               "' stroke='" + s.color + "' stroke-width='2'" +
               (s.dashed ? " stroke-dasharray='6 4'" : "") + "/>\n";
        out += "<text x='" + detail::num(lx + 32) + "' y='" + detail::num(ly) +
               "' font-size='12'>" + s.label + "</text>\n";
        ly += 16.0;
    }
    out += "</svg>\n";
    return out;
}

// Contour lines of a regular grid by marching squares with linear edge
// interpolation; saddle cells are split by the cell-center average.
inline std::string contour_chart(const std::string& title, const std::string& x_label,
                                 const std::string& y_label, const Example1Grid& grid,
                                 int n_levels, const std::vector<Marker>& markers) {
    detail::Frame f;
    f.x_min = grid.beta0_lo;
    f.x_max = grid.beta0_hi;
    f.y_min = grid.beta_t_lo;
    f.y_max = grid.beta_t_hi;

    double z_min = grid.loglik[0], z_max = grid.loglik[0];
    for (double z : grid.loglik) {
        z_min = std::min(z_min, z);
        z_max = std::max(z_max, z);
    }

    std::string out = detail::header(f.width, f.height);
    detail::axes(out, f, title, x_label, y_label);

    for (int li = 1; li <= n_levels; ++li) {
        const double level = z_min + (z_max - z_min) * li / (n_levels + 1);
        std::string path;
        auto lerp = [&](double a, double b, double za, double zb) {
            return a + (b - a) * (level - za) / (zb - za);
        };
        for (int i = 0; i + 1 < grid.n_beta0; ++i) {
            for (int j = 0; j + 1 < grid.n_beta_t; ++j) {
                const double x0 = grid.beta0_at(i), x1 = grid.beta0_at(i + 1);
                const double y0 = grid.beta_t_at(j), y1 = grid.beta_t_at(j + 1);
                const double z00 = grid.value(i, j), z10 = grid.value(i + 1, j);
                const double z11 = grid.value(i + 1, j + 1), z01 = grid.value(i, j + 1);
                int idx = 0;
                if (z00 > level) idx |= 1;
                if (z10 > level) idx |= 2;
                if (z11 > level) idx |= 4;
                if (z01 > level) idx |= 8;
                if (idx == 0 || idx == 15) continue;

                // Edge crossings: bottom (y0), right (x1), top (y1), left (x0).
                std::array<std::array<double, 2>, 4> pt{};
                std::array<bool, 4> hit{false, false, false, false};
                if ((idx & 1) != (idx >> 1 & 1)) {
                    pt[0] = {lerp(x0, x1, z00, z10), y0};
                    hit[0] = true;
                }
                if ((idx >> 1 & 1) != (idx >> 2 & 1)) {
                    pt[1] = {x1, lerp(y0, y1, z10, z11)};
                    hit[1] = true;
                }
                if ((idx >> 3 & 1) != (idx >> 2 & 1)) {
                    pt[2] = {lerp(x0, x1, z01, z11), y1};
                    hit[2] = true;
                }
                if ((idx & 1) != (idx >> 3 & 1)) {
                    pt[3] = {x0, lerp(y0, y1, z00, z01)};
                    hit[3] = true;
                }
                std::vector<std::array<double, 2>> pts;
                for (int e = 0; e < 4; ++e) {
                    if (hit[e]) pts.push_back(pt[e]);
                }
                auto seg = [&](const std::array<double, 2>& a,
                               const std::array<double, 2>& b) {
                    path += "M" + detail::num(f.px(a[0])) + " " + detail::num(f.py(a[1])) +
                            "L" + detail::num(f.px(b[0])) + " " + detail::num(f.py(b[1]));
                };
                if (pts.size() == 2) {
                    seg(pts[0], pts[1]);
                } else if (pts.size() == 4) {
                    const double center = 0.25 * (z00 + z10 + z11 + z01);
                    const bool join_low = (center > level) == ((idx & 1) != 0);
                    if (join_low) {
                        seg(pt[0], pt[1]);
                        seg(pt[2], pt[3]);
                    } else {
                        seg(pt[0], pt[3]);
                        seg(pt[1], pt[2]);
                    }
                }
            }
        }
        if (!path.empty()) {
            out += "<path d='" + path +
                   "' fill='none' stroke='#7799bb' stroke-width='1'/>\n";
        }
    }

    double ly = f.top + 14.0;
    for (const auto& m : markers) {
        out += "<circle cx='" + detail::num(f.px(m.x)) + "' cy='" + detail::num(f.py(m.y)) +
               "' r='4.5' fill='" + m.color + "'/>\n";
        const double lx = f.width - f.right - 190.0;
        out += "<circle cx='" + detail::num(lx + 8) + "' cy='" + detail::num(ly - 4) +
               "' r='4.5' fill='" + m.color + "'/>\n";
        out += "<text x='" + detail::num(lx + 20) + "' y='" + detail::num(ly) +
               "' font-size='12'>" + m.label + "</text>\n";
        ly += 16.0;
    }
    out += "</svg>\n";
    return out;
}

// Per-magnitude PEHE chart for a sweep: one line per
// method, ATE baseline dashed, and a shaded band over the covariate range
// where the constrained offset beats the ATE baseline.
inline std::string sweep_chart(const std::vector<SweepRow>& rows, double or_u,
                               std::optional<double> alpha, const std::string& title) {
    static const std::array<std::pair<MethodId, const char*>, 6> palette{{
        {MethodId::ate_baseline, "#555555"},
        {MethodId::rct_reference, "#009688"},
        {MethodId::full_observational, "#d62728"},
        {MethodId::conditional_offset, "#1f77b4"},
        {MethodId::marginal_offset, "#ff7f0e"},
        {MethodId::constrained_offset, "#2ca02c"},
    }};
    std::vector<Series> series;
    for (const auto& [method, color] : palette) {
        Series s;
        s.label = std::string(method_name(method));
        s.color = color;
        s.dashed = method == MethodId::ate_baseline;
        for (const SweepRow& r : rows) {
            if (r.method != method || r.or_u != or_u || r.alpha != alpha) continue;
            s.points.push_back({r.beta_x, r.pehe});
        }
        if (!s.points.empty()) series.push_back(std::move(s));
    }

    // Shade beta_x stretches where the constrained offset improves on the
    // ATE baseline.
    std::vector<Band> bands;
    std::vector<std::pair<double, bool>> better;
    for (const SweepRow& r : rows) {
        if (r.or_u != or_u || r.alpha != alpha) continue;
        if (r.method != MethodId::constrained_offset) continue;
        for (const SweepRow& b : rows) {
            if (b.or_u == or_u && b.alpha == alpha && b.beta_x == r.beta_x &&
                b.method == MethodId::ate_baseline) {
                better.emplace_back(r.beta_x, r.pehe < b.pehe);
            }
        }
    }
    for (std::size_t i = 0; i < better.size();) {
        if (!better[i].second) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < better.size() && better[j + 1].second) ++j;
        bands.push_back({better[i].first, better[j].first});
        i = j + 1;
    }
    return line_chart(title, "covariate log odds-ratio", "PEHE", series, bands);
}

}  // namespace offsetcate::svg
