#pragma once

#include <array>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "offsetcate/causal.hpp"
#include "offsetcate/dgm.hpp"
#include "offsetcate/estimators.hpp"
#include "offsetcate/likelihood.hpp"
#include "offsetcate/metrics.hpp"

namespace offsetcate {

// Floats in CSV output carry 12 significant digits.
inline std::string format_sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::vector<double> default_beta_x_grid() {
    // 21 covariate log odds-ratios, evenly spaced from OR 1 to OR 10 in log
    // space (i.e. linear in the coefficient).
    std::vector<double> g(21);
    const double hi = std::log(10.0);
    for (int i = 0; i < 21; ++i) g[i] = hi * i / 20.0;
    return g;
}

// One sweep configuration: the grids plus the scalar knobs shared by every
// grid point. `alpha` is only consumed by the correlated sweep.
struct SweepSpec {
    std::vector<double> or_u{1.0, 2.0, 5.0, 10.0};
    std::vector<double> beta_x = default_beta_x_grid();
    std::vector<double> alpha{0.1, 0.3, 0.5, 0.7, 0.9};
    double p_u = 0.5;
    double p_x = 0.5;
    double beta_t = 1.0;
    std::vector<MethodId> methods{all_methods.begin(), all_methods.end()};

    void validate() const {
        if (or_u.empty() || beta_x.empty() || alpha.empty() || methods.empty()) {
            throw std::invalid_argument("SweepSpec: grids and method list must be nonempty");
        }
        for (double v : or_u) {
            if (!(v > 0.0)) throw std::invalid_argument("SweepSpec: or_u values must be > 0");
        }
    }
};

// One DGM configuration x one method; the unit of CSV output.
struct SweepRow {
    double or_u = 1.0;
    double beta_x = 0.0;
    std::optional<double> alpha;
    double p_u = 0.5;
    double p_x = 0.5;
    double beta_t = 1.0;
    MethodId method = MethodId::ate_baseline;
    std::optional<double> fit_beta0;
    std::optional<double> fit_beta_t;
    std::optional<double> fit_beta_x;
    std::optional<double> implied_gamma;
    double true_gamma = 0.0;
    double pehe = 0.0;
    bool converged = true;
};

inline constexpr const char* sweep_csv_header =
    "or_u,beta_x,alpha,p_u,p_x,beta_t,method,fit_beta0,fit_beta_t,fit_beta_x,"
    "implied_gamma,true_gamma,pehe,converged";

inline std::string to_csv(const std::vector<SweepRow>& rows) {
    std::string out = sweep_csv_header;
    out += '\n';
    auto opt = [](const std::optional<double>& v) {
        return v ? format_sig12(*v) : std::string();
    };
    for (const SweepRow& r : rows) {
        out += format_sig12(r.or_u);
        out += ',';
        out += format_sig12(r.beta_x);
        out += ',';
        out += opt(r.alpha);
        out += ',';
        out += format_sig12(r.p_u);
        out += ',';
        out += format_sig12(r.p_x);
        out += ',';
        out += format_sig12(r.beta_t);
        out += ',';
        out += method_name(r.method);
        out += ',';
        out += opt(r.fit_beta0);
        out += ',';
        out += opt(r.fit_beta_t);
        out += ',';
        out += opt(r.fit_beta_x);
        out += ',';
        out += opt(r.implied_gamma);
        out += ',';
        out += format_sig12(r.true_gamma);
        out += ',';
        out += format_sig12(r.pehe);
        out += ',';
        out += r.converged ? "true" : "false";
        out += '\n';
    }
    return out;
}

namespace detail {

// Runs fn(0..n-1) on `jobs` threads. Each index writes only its own slot, so
// the merged output is identical to a serial run.
template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    jobs = std::min(jobs, n);
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace detail

// All requested methods evaluated on one DGM configuration. Fit failures are
// recorded in-row via the converged flag; the sweep keeps going.
inline std::vector<SweepRow> evaluate_grid_point(const SweepSpec& cfg, double or_u,
                                                 double beta_x,
                                                 std::optional<double> alpha) {
    ScmSpec spec;
    spec.p_u = cfg.p_u;
    spec.p_x = cfg.p_x;
    spec.alpha = alpha;
    spec.beta_t = cfg.beta_t;
    spec.beta_x = beta_x;
    spec.beta_ut = std::log(or_u);
    spec.beta_uy = std::log(or_u);

    const JointTable table = build_joint(spec);
    const std::array<double, 2> weights = x_marginal(table);
    const double gamma_star = true_marginal_log_or(spec);

    bool want[6] = {false, false, false, false, false, false};
    for (MethodId m : cfg.methods) want[static_cast<int>(m)] = true;

    std::optional<FitResult> rct;
    if (want[static_cast<int>(MethodId::rct_reference)] ||
        want[static_cast<int>(MethodId::conditional_offset)]) {
        rct = fit_rct_reference(spec);
    }
    std::optional<FitResult> full;
    if (want[static_cast<int>(MethodId::full_observational)] ||
        want[static_cast<int>(MethodId::constrained_offset)]) {
        full = fit_mle(table, ModelParams::all_free());
    }

    SweepRow base;
    base.or_u = or_u;
    base.beta_x = beta_x;
    base.alpha = alpha;
    base.p_u = spec.p_u_marginal();
    base.p_x = cfg.p_x;
    base.beta_t = cfg.beta_t;
    base.true_gamma = gamma_star;

    std::vector<SweepRow> rows;
    for (MethodId m : all_methods) {
        if (!want[static_cast<int>(m)]) continue;
        SweepRow row = base;
        row.method = m;
        if (m == MethodId::ate_baseline) {
            row.pehe = pehe(CatePrediction::constant(ate_baseline(spec)), spec);
            row.converged = true;
            rows.push_back(row);
            continue;
        }
        FitResult fit;
        switch (m) {
            case MethodId::rct_reference:
                fit = *rct;
                break;
            case MethodId::full_observational:
                fit = *full;
                break;
            case MethodId::conditional_offset: {
                fit = fit_mle(table, ModelParams::with_offset(rct->params.beta_t()));
                fit.converged = fit.converged && rct->converged;
                break;
            }
            case MethodId::marginal_offset:
                fit = fit_mle(table, ModelParams::with_offset(gamma_star));
                break;
            case MethodId::constrained_offset:
                fit = fit_constrained(table, gamma_star, weights, full->params);
                break;
            default:
                break;
        }
        row.fit_beta0 = fit.params.beta0();
        row.fit_beta_t = fit.params.beta_t();
        row.fit_beta_x = fit.params.beta_x();
        row.implied_gamma = implied_marginal_log_or(fit.params, weights);
        row.pehe = pehe(CatePrediction::from_fit(fit), spec);
        row.converged = fit.converged;
        rows.push_back(row);
    }
    return rows;
}

// Decoupled sweep over or_u x beta_x, methods in canonical order within each
// grid point; rows come out in lexicographic grid order regardless of jobs.
inline std::vector<SweepRow> run_covariate_sweep(const SweepSpec& cfg, int jobs = 1) {
    cfg.validate();
    const int n = static_cast<int>(cfg.or_u.size() * cfg.beta_x.size());
    std::vector<std::vector<SweepRow>> cells(static_cast<std::size_t>(n));
    detail::parallel_for(n, jobs, [&](int i) {
        const std::size_t io = static_cast<std::size_t>(i) / cfg.beta_x.size();
        const std::size_t ib = static_cast<std::size_t>(i) % cfg.beta_x.size();
        cells[static_cast<std::size_t>(i)] =
            evaluate_grid_point(cfg, cfg.or_u[io], cfg.beta_x[ib], std::nullopt);
    });
    std::vector<SweepRow> rows;
    for (auto& cell : cells) rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

// Correlated-confounder sweep: alpha x or_u x beta_x.
inline std::vector<SweepRow> run_correlated_sweep(const SweepSpec& cfg, int jobs = 1) {
    cfg.validate();
    const std::size_t per_alpha = cfg.or_u.size() * cfg.beta_x.size();
    const int n = static_cast<int>(cfg.alpha.size() * per_alpha);
    std::vector<std::vector<SweepRow>> cells(static_cast<std::size_t>(n));
    detail::parallel_for(n, jobs, [&](int i) {
        const std::size_t ia = static_cast<std::size_t>(i) / per_alpha;
        const std::size_t rest = static_cast<std::size_t>(i) % per_alpha;
        const std::size_t io = rest / cfg.beta_x.size();
        const std::size_t ib = rest % cfg.beta_x.size();
        cells[static_cast<std::size_t>(i)] =
            evaluate_grid_point(cfg, cfg.or_u[io], cfg.beta_x[ib], cfg.alpha[ia]);
    });
    std::vector<SweepRow> rows;
    for (auto& cell : cells) rows.insert(rows.end(), cell.begin(), cell.end());
    return rows;
}

struct RunSummary {
    std::size_t rows = 0;
    std::size_t non_converged = 0;
    bool all_converged() const { return non_converged == 0; }
};

inline RunSummary summarize(const std::vector<SweepRow>& rows) {
    RunSummary s;
    s.rows = rows.size();
    for (const SweepRow& r : rows) {
        if (!r.converged) ++s.non_converged;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Covariate-free demonstration: solutions and likelihood surfaces per
// confounding magnitude.

struct Example1Solution {
    double or_u = 1.0;
    MethodId method = MethodId::rct_reference;
    double beta0 = 0.0;
    double beta_t = 0.0;
    double loglik = 0.0;  // observational expected log-likelihood at the point
};

struct Example1Grid {
    double or_u = 1.0;
    int n_beta0 = 0;
    int n_beta_t = 0;
    double beta0_lo = 0.0, beta0_hi = 0.0;
    double beta_t_lo = 0.0, beta_t_hi = 0.0;
    std::vector<double> loglik;  // row-major over (beta0, beta_t)

    double beta0_at(int i) const {
        return beta0_lo + (beta0_hi - beta0_lo) * i / (n_beta0 - 1);
    }
    double beta_t_at(int j) const {
        return beta_t_lo + (beta_t_hi - beta_t_lo) * j / (n_beta_t - 1);
    }
    double value(int i, int j) const {
        return loglik[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_beta_t) +
                      static_cast<std::size_t>(j)];
    }
};

struct Example1Result {
    std::vector<Example1Solution> solutions;
    std::vector<Example1Grid> grids;
    std::size_t non_converged = 0;
};

// Per confounding magnitude: the trial ground-truth point (the logits of the
// interventional distribution, which is also what a trial fit recovers), the
// fully observational two-parameter fit, and the offset fit that keeps
// beta_t at its ground-truth value. Plus a likelihood surface for contours.
inline Example1Result run_example1(const std::vector<double>& or_grid, double p_u = 0.5,
                                   double beta_t = 1.0, int grid_points = 61) {
    if (or_grid.empty()) throw std::invalid_argument("run_example1: empty or_u grid");
    if (grid_points < 2) throw std::invalid_argument("run_example1: grid too small");
    Example1Result out;
    for (double or_u : or_grid) {
        if (!(or_u > 0.0)) throw std::invalid_argument("run_example1: or_u must be > 0");
        ScmSpec spec;
        spec.p_u = p_u;
        spec.beta_t = beta_t;
        spec.beta_ut = std::log(or_u);
        spec.beta_uy = std::log(or_u);

        const JointTable table = build_joint(spec);
        const Example1Dgm dgm = Example1Dgm::from_spec(spec);
        const double beta0_star = dgm.ground_truth_beta0();
        const double beta_t_star = dgm.ground_truth_beta_t();

        const FitResult full = fit_mle(table, ModelParams::no_covariate());
        ModelParams offset_init = ModelParams::with_offset(beta_t_star);
        offset_init.is_free[2] = false;
        const FitResult offset = fit_mle(table, offset_init);
        if (!full.converged) ++out.non_converged;
        if (!offset.converged) ++out.non_converged;

        auto loglik_at = [&](double b0, double bt) {
            ModelParams p;
            p.coef = {b0, bt, 0.0};
            return expected_loglik(p, table);
        };

        out.solutions.push_back({or_u, MethodId::rct_reference, beta0_star, beta_t_star,
                                 loglik_at(beta0_star, beta_t_star)});
        out.solutions.push_back({or_u, MethodId::full_observational, full.params.beta0(),
                                 full.params.beta_t(), full.loglik});
        out.solutions.push_back({or_u, MethodId::conditional_offset, offset.params.beta0(),
                                 offset.params.beta_t(), offset.loglik});

        // Surface window centered on the three solutions.
        const double b0s[3] = {beta0_star, full.params.beta0(), offset.params.beta0()};
        const double bts[3] = {beta_t_star, full.params.beta_t(), offset.params.beta_t()};
        double b0_lo = b0s[0], b0_hi = b0s[0], bt_lo = bts[0], bt_hi = bts[0];
        for (int i = 1; i < 3; ++i) {
            b0_lo = std::min(b0_lo, b0s[i]);
            b0_hi = std::max(b0_hi, b0s[i]);
            bt_lo = std::min(bt_lo, bts[i]);
            bt_hi = std::max(bt_hi, bts[i]);
        }
        const double pad0 = std::max(0.8, 0.75 * (b0_hi - b0_lo));
        const double padt = std::max(0.8, 0.75 * (bt_hi - bt_lo));

        Example1Grid grid;
        grid.or_u = or_u;
        grid.n_beta0 = grid_points;
        grid.n_beta_t = grid_points;
        grid.beta0_lo = b0_lo - pad0;
        grid.beta0_hi = b0_hi + pad0;
        grid.beta_t_lo = bt_lo - padt;
        grid.beta_t_hi = bt_hi + padt;
        grid.loglik.resize(static_cast<std::size_t>(grid_points) *
                           static_cast<std::size_t>(grid_points));
        for (int i = 0; i < grid_points; ++i) {
            for (int j = 0; j < grid_points; ++j) {
                grid.loglik[static_cast<std::size_t>(i) * grid_points + j] =
                    loglik_at(grid.beta0_at(i), grid.beta_t_at(j));
            }
        }
        out.grids.push_back(std::move(grid));
    }
    return out;
}

inline std::string example1_solutions_csv(const Example1Result& result) {
    std::string out = "or_u,method,beta0,beta_t,loglik\n";
    for (const auto& s : result.solutions) {
        out += format_sig12(s.or_u);
        out += ',';
        out += method_name(s.method);
        out += ',';
        out += format_sig12(s.beta0);
        out += ',';
        out += format_sig12(s.beta_t);
        out += ',';
        out += format_sig12(s.loglik);
        out += '\n';
    }
    return out;
}

inline std::string example1_grid_csv(const Example1Result& result) {
    std::string out = "or_u,beta0,beta_t,loglik\n";
    for (const auto& g : result.grids) {
        for (int i = 0; i < g.n_beta0; ++i) {
            for (int j = 0; j < g.n_beta_t; ++j) {
                out += format_sig12(g.or_u);
                out += ',';
                out += format_sig12(g.beta0_at(i));
                out += ',';
                out += format_sig12(g.beta_t_at(j));
                out += ',';
                out += format_sig12(g.value(i, j));
                out += '\n';
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Marginal-vs-conditional odds-ratio reference table.

struct CollapsibilitySetting {
    std::string name;
    std::array<double, 2> beta0_of_x{};
    double beta_t = 1.0;
    double p_x1 = 0.5;
    std::array<CollapsibilityRow, 2> rows{};
};

inline std::vector<CollapsibilitySetting> run_collapsibility_table() {
    std::vector<CollapsibilitySetting> settings{
        {"a", {-1.5, 0.5}, 1.0, 0.5, {}},
        {"b", {-3.5, 2.5}, 1.0, 0.5, {}},
    };
    for (auto& s : settings) {
        s.rows = collapsibility_pipeline(s.beta0_of_x, s.beta_t, s.p_x1);
    }
    return settings;
}

inline std::string collapsibility_csv(const std::vector<CollapsibilitySetting>& settings) {
    std::string out =
        "setting,x,eta0_x,eta1_x,beta_t,pi0_x,pi1_x,pi0,pi1,eta0,eta1,gamma\n";
    for (const auto& s : settings) {
        for (const auto& row : s.rows) {
            out += s.name;
            out += ',';
            out += std::to_string(row.x);
            out += ',';
            out += format_sig12(row.eta0);
            out += ',';
            out += format_sig12(row.eta1);
            out += ',';
            out += format_sig12(s.beta_t);
            out += ',';
            out += format_sig12(row.pi0_x);
            out += ',';
            out += format_sig12(row.pi1_x);
            out += ',';
            out += format_sig12(row.pi0);
            out += ',';
            out += format_sig12(row.pi1);
            out += ',';
            out += format_sig12(row.eta0_marg);
            out += ',';
            out += format_sig12(row.eta1_marg);
            out += ',';
            out += format_sig12(row.gamma_t);
            out += '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Config files: line-oriented `key = value`, lists comma-separated, `#`
// starts a comment. Unknown keys are an error.

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_number(const std::string& s, int line_no) {
    const std::string t = trim(s);
    if (t.empty()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": empty number");
    }
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": cannot parse number '" + t + "'");
    }
    if (pos != t.size()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": cannot parse number '" + t + "'");
    }
    return v;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::string cur;
    std::stringstream ss(s);
    while (std::getline(ss, cur, ',')) items.push_back(cur);
    return items;
}

}  // namespace detail

inline SweepSpec parse_config(std::istream& in) {
    SweepSpec cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = detail::trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        }
        const std::string key = detail::trim(text.substr(0, eq));
        const std::string value = detail::trim(text.substr(eq + 1));

        auto number_list = [&](std::vector<double>& dst) {
            dst.clear();
            for (const std::string& item : detail::split_list(value)) {
                dst.push_back(detail::parse_number(item, line_no));
            }
            if (dst.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty list");
            }
        };

        if (key == "or_u") {
            number_list(cfg.or_u);
        } else if (key == "beta_x") {
            number_list(cfg.beta_x);
        } else if (key == "alpha") {
            number_list(cfg.alpha);
        } else if (key == "p_u") {
            cfg.p_u = detail::parse_number(value, line_no);
        } else if (key == "p_x") {
            cfg.p_x = detail::parse_number(value, line_no);
        } else if (key == "beta_t") {
            cfg.beta_t = detail::parse_number(value, line_no);
        } else if (key == "methods") {
            cfg.methods.clear();
            for (const std::string& item : detail::split_list(value)) {
                const std::string name = detail::trim(item);
                const auto m = parse_method(name);
                if (!m) {
                    throw std::invalid_argument("config line " + std::to_string(line_no) +
                                                ": unknown method '" + name + "'");
                }
                cfg.methods.push_back(*m);
            }
            if (cfg.methods.empty()) {
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": empty method list");
            }
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline SweepSpec parse_config_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace offsetcate
