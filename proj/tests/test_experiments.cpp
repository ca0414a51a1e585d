#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "offsetcate/experiments.hpp"
#include "offsetcate/svg.hpp"

using namespace offsetcate;
using Catch::Matchers::WithinAbs;

namespace {

SweepSpec small_grid() {
    SweepSpec cfg;
    cfg.or_u = {1.0, 5.0};
    cfg.beta_x = {0.0, 0.7};
    cfg.alpha = {0.3, 0.5};
    return cfg;
}

// Drops the third field (alpha) from a CSV line.
std::string without_alpha(const std::string& line) {
    std::string out;
    std::stringstream ss(line);
    std::string field;
    int i = 0;
    while (std::getline(ss, field, ',')) {
        if (i++ == 2) continue;
        if (!out.empty()) out += ',';
        out += field;
    }
    return out;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("config parsing") {
    SECTION("full round trip") {
        const std::string text =
            "# comment\n"
            "or_u = 1, 2.5, 10\n"
            "beta_x = 0, 0.5\n"
            "alpha = 0.2\n"
            "p_u = 0.4\n"
            "p_x = 0.6\n"
            "beta_t = 1.5\n"
            "methods = ate_baseline, constrained_offset\n";
        const SweepSpec cfg = parse_config_string(text);
        REQUIRE(cfg.or_u == std::vector<double>{1.0, 2.5, 10.0});
        REQUIRE(cfg.beta_x == std::vector<double>{0.0, 0.5});
        REQUIRE(cfg.alpha == std::vector<double>{0.2});
        REQUIRE(cfg.p_u == 0.4);
        REQUIRE(cfg.p_x == 0.6);
        REQUIRE(cfg.beta_t == 1.5);
        REQUIRE(cfg.methods ==
                std::vector<MethodId>{MethodId::ate_baseline, MethodId::constrained_offset});
    }
    SECTION("unknown key is an error naming the key") {
        REQUIRE_THROWS_WITH(parse_config_string("p_z = 0.5\n"),
                            Catch::Matchers::ContainsSubstring("p_z"));
    }
    SECTION("malformed values") {
        REQUIRE_THROWS_AS(parse_config_string("p_u = zero\n"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_config_string("or_u = 1, , 2\n"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_config_string("beta_t\n"), std::invalid_argument);
        REQUIRE_THROWS_AS(parse_config_string("methods = warp_drive\n"),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(parse_config_string("or_u = -1\n"), std::invalid_argument);
    }
}

TEST_CASE("float formatting carries 12 significant digits") {
    REQUIRE(format_sig12(1.0 / 3.0) == "0.333333333333");
    REQUIRE(format_sig12(1.0) == "1");
    REQUIRE(format_sig12(12345.6789) == "12345.6789");
}

TEST_CASE("default covariate grid spans OR 1..10 in 21 steps") {
    const auto g = default_beta_x_grid();
    REQUIRE(g.size() == 21);
    REQUIRE(g.front() == 0.0);
    REQUIRE_THAT(g.back(), WithinAbs(std::log(10.0), 1e-15));
    REQUIRE_THAT(g[10], WithinAbs(0.5 * std::log(10.0), 1e-15));
}

TEST_CASE("sweep rows come out in grid-major, method-minor order") {
    const SweepSpec cfg = small_grid();
    const auto rows = run_covariate_sweep(cfg);
    REQUIRE(rows.size() == cfg.or_u.size() * cfg.beta_x.size() * cfg.methods.size());
    std::size_t k = 0;
    for (double or_u : cfg.or_u) {
        for (double beta_x : cfg.beta_x) {
            for (MethodId m : all_methods) {
                REQUIRE(rows[k].or_u == or_u);
                REQUIRE(rows[k].beta_x == beta_x);
                REQUIRE(rows[k].method == m);
                REQUIRE_FALSE(rows[k].alpha.has_value());
                ++k;
            }
        }
    }
}

TEST_CASE("method subsets are honored") {
    SweepSpec cfg = small_grid();
    cfg.methods = {MethodId::ate_baseline, MethodId::marginal_offset};
    const auto rows = run_covariate_sweep(cfg);
    REQUIRE(rows.size() == cfg.or_u.size() * cfg.beta_x.size() * 2);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
        REQUIRE(rows[i].method == MethodId::ate_baseline);
        REQUIRE(rows[i + 1].method == MethodId::marginal_offset);
    }
}

TEST_CASE("ATE baseline rows carry no fitted coefficients") {
    SweepSpec cfg = small_grid();
    cfg.methods = {MethodId::ate_baseline, MethodId::full_observational};
    const auto rows = run_covariate_sweep(cfg);
    for (const SweepRow& r : rows) {
        if (r.method == MethodId::ate_baseline) {
            REQUIRE_FALSE(r.fit_beta0.has_value());
            REQUIRE_FALSE(r.implied_gamma.has_value());
            REQUIRE(r.converged);
        } else {
            REQUIRE(r.fit_beta0.has_value());
            REQUIRE(r.implied_gamma.has_value());
        }
    }
}

TEST_CASE("CSV header is pinned") {
    REQUIRE(std::string(sweep_csv_header) ==
            "or_u,beta_x,alpha,p_u,p_x,beta_t,method,fit_beta0,fit_beta_t,fit_beta_x,"
            "implied_gamma,true_gamma,pehe,converged");
}

TEST_CASE("repeated runs are byte-identical") {
    const SweepSpec cfg = small_grid();
    REQUIRE(to_csv(run_covariate_sweep(cfg)) == to_csv(run_covariate_sweep(cfg)));
    REQUIRE(to_csv(run_correlated_sweep(cfg)) == to_csv(run_correlated_sweep(cfg)));
}

TEST_CASE("parallel and serial execution agree byte-for-byte") {
    const SweepSpec cfg = small_grid();
    REQUIRE(to_csv(run_covariate_sweep(cfg, 1)) == to_csv(run_covariate_sweep(cfg, 4)));
    REQUIRE(to_csv(run_correlated_sweep(cfg, 1)) == to_csv(run_correlated_sweep(cfg, 4)));
}

TEST_CASE("alpha = 1/2 rows replicate the decoupled sweep") {
    const SweepSpec cfg = small_grid();
    const auto decoupled = lines_of(to_csv(run_covariate_sweep(cfg)));
    const auto coupled = lines_of(to_csv(run_correlated_sweep(cfg)));
    std::vector<std::string> alpha_half;
    for (const std::string& line : coupled) {
        if (line.find(",0.5,") != std::string::npos &&
            line.compare(0, 5, "or_u,") != 0) {
            // third field is alpha; match it precisely
            std::stringstream ss(line);
            std::string f;
            std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            if (f == "0.5") alpha_half.push_back(without_alpha(line));
        }
    }
    std::vector<std::string> plain;
    for (std::size_t i = 1; i < decoupled.size(); ++i) {
        plain.push_back(without_alpha(decoupled[i]));
    }
    REQUIRE(alpha_half == plain);
}

TEST_CASE("summary counts non-converged rows") {
    std::vector<SweepRow> rows(3);
    rows[1].converged = false;
    const RunSummary s = summarize(rows);
    REQUIRE(s.rows == 3);
    REQUIRE(s.non_converged == 1);
    REQUIRE_FALSE(s.all_converged());
}

TEST_CASE("covariate-free study") {
    const Example1Result result = run_example1({1.0, 10.0});
    REQUIRE(result.non_converged == 0);
    REQUIRE(result.solutions.size() == 6);
    REQUIRE(result.grids.size() == 2);

    SECTION("no confounding: all three solutions coincide") {
        double b0[3], bt[3];
        int k = 0;
        for (const auto& s : result.solutions) {
            if (s.or_u == 1.0) {
                b0[k] = s.beta0;
                bt[k] = s.beta_t;
                ++k;
            }
        }
        REQUIRE(k == 3);
        for (int i = 1; i < 3; ++i) {
            REQUIRE_THAT(b0[i], WithinAbs(b0[0], 1e-6));
            REQUIRE_THAT(bt[i], WithinAbs(bt[0], 1e-6));
        }
    }
    SECTION("strong confounding: offset stays near the truth, free fit drifts") {
        double truth_b0 = 0.0, full_b0 = 0.0, offset_b0 = 0.0;
        for (const auto& s : result.solutions) {
            if (s.or_u != 10.0) continue;
            if (s.method == MethodId::rct_reference) truth_b0 = s.beta0;
            if (s.method == MethodId::full_observational) full_b0 = s.beta0;
            if (s.method == MethodId::conditional_offset) offset_b0 = s.beta0;
        }
        REQUIRE(std::abs(offset_b0 - truth_b0) < std::abs(full_b0 - truth_b0));
    }
    SECTION("surface matches the likelihood pointwise") {
        const Example1Grid& grid = result.grids[1];
        ScmSpec s;
        s.beta_t = 1.0;
        s.beta_ut = std::log(10.0);
        s.beta_uy = std::log(10.0);
        const JointTable t = build_joint(s);
        for (int i : {0, 7, 30, 60}) {
            for (int j : {0, 13, 31, 60}) {
                ModelParams p;
                p.coef = {grid.beta0_at(i), grid.beta_t_at(j), 0.0};
                REQUIRE_THAT(grid.value(i, j), WithinAbs(expected_loglik(p, t), 1e-12));
            }
        }
    }
    SECTION("surface window covers all solutions") {
        for (const auto& s : result.solutions) {
            for (const auto& g : result.grids) {
                if (g.or_u != s.or_u) continue;
                REQUIRE(s.beta0 > g.beta0_lo);
                REQUIRE(s.beta0 < g.beta0_hi);
                REQUIRE(s.beta_t > g.beta_t_lo);
                REQUIRE(s.beta_t < g.beta_t_hi);
            }
        }
    }
}

TEST_CASE("sweep orderings on the default symmetric family") {
    SweepSpec cfg;
    cfg.or_u = {1.0, 10.0};
    cfg.beta_x = {0.0, 0.7, 1.4};
    const auto rows = run_covariate_sweep(cfg);
    auto row_of = [&](double or_u, double bx, MethodId m) -> const SweepRow& {
        for (const SweepRow& r : rows) {
            if (r.or_u == or_u && r.beta_x == bx && r.method == m) return r;
        }
        FAIL("row not found");
        return rows.front();
    };
    SECTION("no heterogeneity to model: ATE baseline is minimal at beta_x = 0") {
        for (double or_u : cfg.or_u) {
            const double ate = row_of(or_u, 0.0, MethodId::ate_baseline).pehe;
            for (MethodId m : all_methods) {
                REQUIRE(ate <= row_of(or_u, 0.0, m).pehe + 1e-12);
            }
        }
    }
    SECTION("heavy confounding pushes the free fit past the ATE baseline") {
        for (double bx : cfg.beta_x) {
            REQUIRE(row_of(10.0, bx, MethodId::full_observational).pehe >
                    row_of(10.0, bx, MethodId::ate_baseline).pehe);
        }
    }
}

TEST_CASE("asymmetric-confounder sweep shows the substantive orderings") {
    // p_u = 1/2 collapses several contrasts (constant CATE, exact trial
    // reference); off that point the full story is visible.
    SweepSpec cfg;
    cfg.p_u = 0.3;
    cfg.or_u = {2.0, 10.0};
    cfg.beta_x = {0.35, 0.7, 1.4};
    const auto rows = run_covariate_sweep(cfg);
    const std::size_t methods = cfg.methods.size();
    for (std::size_t p = 0; p * methods < rows.size(); ++p) {
        const SweepRow& ate = rows[p * methods];
        const SweepRow& full = rows[p * methods + 2];
        const SweepRow& cons = rows[p * methods + 5];
        REQUIRE(ate.pehe > 1e-4);  // real heterogeneity signal
        if (std::exp(*full.fit_beta_x) > 1.05) {
            REQUIRE(cons.pehe < ate.pehe);
        }
        REQUIRE(cons.pehe <= full.pehe + 1e-9);
    }
}

TEST_CASE("constrained fit never trails the free fit on correlated grids") {
    SweepSpec cfg;
    cfg.or_u = {2.0, 10.0};
    cfg.beta_x = {0.0, 0.7, 1.4};
    cfg.alpha = {0.1, 0.5, 0.9};
    const auto rows = run_correlated_sweep(cfg);
    const std::size_t methods = cfg.methods.size();
    for (std::size_t p = 0; p * methods < rows.size(); ++p) {
        const SweepRow& full = rows[p * methods + 2];
        const SweepRow& cons = rows[p * methods + 5];
        REQUIRE(cons.pehe <= full.pehe + 1e-8);
    }
}

TEST_CASE("reference table emitter") {
    const auto settings = run_collapsibility_table();
    REQUIRE(settings.size() == 2);
    REQUIRE(settings[0].name == "a");
    REQUIRE(settings[1].name == "b");
    REQUIRE_THAT(settings[0].rows[0].gamma_t, WithinAbs(0.791, 5e-4));
    REQUIRE_THAT(settings[1].rows[0].gamma_t, WithinAbs(0.186, 5e-4));

    const std::string csv = collapsibility_csv(settings);
    const auto lines = lines_of(csv);
    REQUIRE(lines.size() == 5);  // header + 2 settings x 2 rows
    REQUIRE(lines[0] ==
            "setting,x,eta0_x,eta1_x,beta_t,pi0_x,pi1_x,pi0,pi1,eta0,eta1,gamma");
    REQUIRE(lines[1].compare(0, 2, "a,") == 0);
    REQUIRE(lines[3].compare(0, 2, "b,") == 0);
}

TEST_CASE("sweep CSV shape") {
    SweepSpec cfg = small_grid();
    cfg.methods = {MethodId::ate_baseline};
    const std::string csv = to_csv(run_covariate_sweep(cfg));
    const auto lines = lines_of(csv);
    REQUIRE(lines.size() == 1 + 4);
    REQUIRE(lines[0] == sweep_csv_header);
    // decoupled rows leave alpha empty: or_u,beta_x,,p_u,...
    REQUIRE(lines[1].find(",,") != std::string::npos);
}

TEST_CASE("SVG output is well-formed enough to ship") {
    const SweepSpec cfg = small_grid();
    const auto rows = run_covariate_sweep(cfg);
    const std::string chart = svg::sweep_chart(rows, 5.0, std::nullopt, "PEHE");
    REQUIRE(chart.find("<svg") == 0);
    REQUIRE(chart.rfind("</svg>") != std::string::npos);
    REQUIRE(chart.find("polyline") != std::string::npos);
    REQUIRE(chart.find("constrained_offset") != std::string::npos);

    const Example1Result result = run_example1({10.0});
    const std::string contours =
        svg::contour_chart("surface", "b0", "bt", result.grids[0], 10, {});
    REQUIRE(contours.find("<path") != std::string::npos);
}
