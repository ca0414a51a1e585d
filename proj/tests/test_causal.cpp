#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "offsetcate/causal.hpp"
#include "offsetcate/dgm.hpp"

using namespace offsetcate;
using Catch::Matchers::WithinAbs;

namespace {

// Reference pooling settings: baseline log odds per covariate level with a
// unit conditional log odds-ratio. Setting a is ScmSpec{beta_t=1, beta_x=2},
// setting b is ScmSpec{beta_t=1, beta_x=6}; with the +-1/2 coding the
// intercepts come out at -1.5 and -3.5.
ScmSpec reference_spec(double beta_x) {
    ScmSpec s;
    s.beta_t = 1.0;
    s.beta_x = beta_x;
    return s;
}

ScmSpec random_spec(std::mt19937& rng, bool allow_alpha = true) {
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    std::uniform_real_distribution<double> coef(-2.5, 2.5);
    ScmSpec s;
    s.p_u = prob(rng);
    s.p_x = prob(rng);
    s.beta_t = coef(rng);
    s.beta_x = coef(rng);
    s.beta_ut = coef(rng);
    s.beta_uy = coef(rng);
    if (allow_alpha && std::bernoulli_distribution(0.5)(rng)) s.alpha = prob(rng);
    return s;
}

}  // namespace

TEST_CASE("interventional distribution ignores an outcome-irrelevant confounder") {
    ScmSpec s;
    s.beta_t = 1.0;
    s.beta_ut = 2.0;  // confounded treatment, but beta_uy = 0
    const InterventionalTable t = interventional(s);
    for (int x = 0; x < 2; ++x) {
        REQUIRE_THAT(t(1, x), WithinAbs(sigmoid(0.5), 1e-14));
        REQUIRE_THAT(t(0, x), WithinAbs(sigmoid(-0.5), 1e-14));
    }
}

TEST_CASE("covariate-free interventional is the p_u-weighted outcome mix") {
    ScmSpec s;
    s.beta_t = 1.0;
    s.beta_ut = 1.5;
    s.beta_uy = 2.0;
    const double pi00 = s.outcome_prob(0, 0, 0);
    const double pi01 = s.outcome_prob(0, 0, 1);
    const InterventionalTable t = interventional(s);
    REQUIRE_THAT(t(0, 0), WithinAbs(0.5 * (pi00 + pi01), 1e-15));
}

TEST_CASE("randomization oracle: do-probabilities equal randomized conditionals") {
    std::mt19937 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const ScmSpec s = random_spec(rng);
        const InterventionalTable t = interventional(s);
        const ConditionalOutcome cond =
            observational_conditional(build_joint(s.randomized()));
        for (int tt = 0; tt < 2; ++tt) {
            for (int x = 0; x < 2; ++x) {
                REQUIRE_THAT(t(tt, x), WithinAbs(cond(tt, x), 1e-12));
            }
        }
    }
}

TEST_CASE("true CATE") {
    SECTION("zero treatment effect") {
        ScmSpec s;
        s.beta_x = 1.0;
        s.beta_uy = 0.7;
        s.beta_ut = 0.3;
        REQUIRE(true_cate(s, 0) == 0.0);
        REQUIRE(true_cate(s, 1) == 0.0);
    }
    SECTION("reference setting a") {
        const ScmSpec s = reference_spec(2.0);
        const double exact = sigmoid(-0.5) - sigmoid(-1.5);
        REQUIRE_THAT(true_cate(s, 0), WithinAbs(exact, 1e-14));
        // 3-decimal reference arithmetic: 0.378 - 0.182 = 0.196
        REQUIRE_THAT(true_cate(s, 0), WithinAbs(0.196, 1e-3));
    }
    SECTION("reference setting b at x=1") {
        const ScmSpec s = reference_spec(6.0);
        const double exact = sigmoid(3.5) - sigmoid(2.5);
        REQUIRE_THAT(true_cate(s, 1), WithinAbs(exact, 1e-14));
        // 0.971 - 0.924 = 0.047
        REQUIRE_THAT(true_cate(s, 1), WithinAbs(0.047, 1e-3));
    }
}

TEST_CASE("true marginal log odds-ratio") {
    SECTION("collapsible case returns beta_t") {
        ScmSpec s;
        s.beta_t = 0.8;
        s.beta_ut = 1.0;  // treatment confounding alone does not matter
        REQUIRE_THAT(true_marginal_log_or(s), WithinAbs(0.8, 1e-12));
    }
    SECTION("reference gamma values") {
        REQUIRE_THAT(true_marginal_log_or(reference_spec(2.0)), WithinAbs(0.791, 5e-4));
        REQUIRE_THAT(true_marginal_log_or(reference_spec(6.0)), WithinAbs(0.186, 5e-4));
    }
}

TEST_CASE("implied marginal log odds-ratio") {
    SECTION("no covariate variation returns beta_t for any weights") {
        ModelParams p;
        p.coef = {-0.7, 1.3, 0.0};
        REQUIRE_THAT(implied_marginal_log_or(p, {0.5, 0.5}), WithinAbs(1.3, 1e-12));
        REQUIRE_THAT(implied_marginal_log_or(p, {0.9, 0.1}), WithinAbs(1.3, 1e-12));
    }
    SECTION("reference parameterizations") {
        ModelParams a;
        a.coef = {-1.5, 1.0, 2.0};
        REQUIRE_THAT(implied_marginal_log_or(a, {0.5, 0.5}), WithinAbs(0.791, 5e-4));
        ModelParams b;
        b.coef = {-3.5, 1.0, 6.0};
        REQUIRE_THAT(implied_marginal_log_or(b, {0.5, 0.5}), WithinAbs(0.186, 5e-4));
    }
    SECTION("agrees with the do-distribution when the model is the truth") {
        // With beta_uy = 0 the fitted family contains the truth, so the
        // implied trial equals the actual trial.
        std::mt19937 rng(29);
        for (int rep = 0; rep < 50; ++rep) {
            ScmSpec s = random_spec(rng, /*allow_alpha=*/false);
            s.beta_uy = 0.0;
            ModelParams truth;
            truth.coef = {-(s.beta_t + s.beta_x) / 2.0, s.beta_t, s.beta_x};
            REQUIRE_THAT(implied_marginal_log_or(truth, {1.0 - s.p_x, s.p_x}),
                         WithinAbs(true_marginal_log_or(s), 1e-12));
        }
    }
}

TEST_CASE("implied marginal gradient matches finite differences") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> prob(0.1, 0.9);
    for (int rep = 0; rep < 100; ++rep) {
        ModelParams p;
        p.coef = {coef(rng), coef(rng), coef(rng)};
        const double w1 = prob(rng);
        const std::array<double, 2> w{1.0 - w1, w1};
        const auto g = implied_marginal_log_or_grad(p, w);
        for (int i = 0; i < 3; ++i) {
            ModelParams hi = p, lo = p;
            hi.coef[i] += 1e-6;
            lo.coef[i] -= 1e-6;
            const double fd =
                (implied_marginal_log_or(hi, w) - implied_marginal_log_or(lo, w)) / 2e-6;
            REQUIRE_THAT(g[i], WithinAbs(fd, 1e-7 * std::max(1.0, std::abs(g[i]))));
        }
    }
}

TEST_CASE("empirical variant reduces to exact weights from counts") {
    ModelParams p;
    p.coef = {-1.0, 0.9, 1.4};
    const std::vector<int> xs{0, 1};
    REQUIRE_THAT(implied_marginal_log_or_empirical(p, xs),
                 WithinAbs(implied_marginal_log_or(p, {0.5, 0.5}), 1e-15));
    const std::vector<int> xs2{0, 0, 1};
    REQUIRE_THAT(implied_marginal_log_or_empirical(p, xs2),
                 WithinAbs(implied_marginal_log_or(p, {2.0 / 3.0, 1.0 / 3.0}), 1e-15));
    REQUIRE_THROWS_AS(implied_marginal_log_or_empirical(p, std::vector<int>{}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(implied_marginal_log_or_empirical(p, std::vector<int>{0, 2}),
                      std::invalid_argument);
}

TEST_CASE("pooling pipeline reproduces the reference table") {
    SECTION("setting a") {
        const auto rows = collapsibility_pipeline({-1.5, 0.5}, 1.0, 0.5);
        REQUIRE_THAT(rows[0].pi0_x, WithinAbs(0.182, 5e-4));
        REQUIRE_THAT(rows[0].pi1_x, WithinAbs(0.378, 5e-4));
        REQUIRE_THAT(rows[1].pi0_x, WithinAbs(0.622, 5e-4));
        REQUIRE_THAT(rows[1].pi1_x, WithinAbs(0.818, 5e-4));
        REQUIRE_THAT(rows[0].pi0, WithinAbs(0.402, 5e-4));
        REQUIRE_THAT(rows[0].pi1, WithinAbs(0.598, 5e-4));
        REQUIRE_THAT(rows[0].eta0_marg, WithinAbs(-0.395, 5e-4));
        REQUIRE_THAT(rows[0].eta1_marg, WithinAbs(0.395, 5e-4));
        REQUIRE_THAT(rows[0].gamma_t, WithinAbs(0.791, 5e-4));
        REQUIRE(rows[0].gamma_t == rows[0].eta1_marg - rows[0].eta0_marg);
    }
    SECTION("setting b") {
        const auto rows = collapsibility_pipeline({-3.5, 2.5}, 1.0, 0.5);
        REQUIRE_THAT(rows[0].pi0, WithinAbs(0.477, 5e-4));
        REQUIRE_THAT(rows[0].pi1, WithinAbs(0.523, 5e-4));
        REQUIRE_THAT(rows[0].gamma_t, WithinAbs(0.186, 5e-4));
    }
    SECTION("near-deterministic risks collapse the marginal odds-ratio to ~1") {
        const double beta_t = std::log(99.0 / 49.0);  // conditional OR 2.0204
        const auto rows = collapsibility_pipeline({logit(0.01), logit(0.98)}, beta_t, 0.5);
        REQUIRE_THAT(rows[0].pi0, WithinAbs(0.495, 1e-12));
        REQUIRE_THAT(rows[0].pi1, WithinAbs(0.505, 1e-12));
        REQUIRE_THAT(std::exp(beta_t), WithinAbs(2.02, 1e-2));
        REQUIRE_THAT(std::exp(rows[0].gamma_t), WithinAbs(1.04, 1e-2));
    }
}

TEST_CASE("marginal log odds-ratio shrinks toward zero as baseline spread grows") {
    double prev = 1.0;  // gamma at zero spread equals beta_t
    for (double spread : {0.0, 0.3, 0.6, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        const auto rows = collapsibility_pipeline({-spread, spread}, 1.0, 0.5);
        const double gamma = rows[0].gamma_t;
        if (spread == 0.0) {
            REQUIRE_THAT(gamma, WithinAbs(1.0, 1e-12));
        } else {
            REQUIRE(gamma < prev);
            REQUIRE(gamma > 0.0);
        }
        prev = gamma;
    }
}

TEST_CASE("marginal stays between zero and the conditional odds-ratio") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> base(-3.0, 3.0);
    std::uniform_real_distribution<double> effect(0.1, 2.5);
    std::uniform_real_distribution<double> prob(0.1, 0.9);
    for (int rep = 0; rep < 200; ++rep) {
        const double b0 = base(rng);
        double b1 = base(rng);
        if (std::abs(b0 - b1) < 0.05) b1 += 0.5;  // keep the spread resolvable
        const double beta_t = effect(rng);
        const auto rows = collapsibility_pipeline({b0, b1}, beta_t, prob(rng));
        REQUIRE(rows[0].gamma_t > 0.0);
        REQUIRE(rows[0].gamma_t < beta_t);
    }
}

TEST_CASE("pooled risks on the boundary are rejected rather than returning inf") {
    REQUIRE_THROWS_AS(collapsibility_pipeline({40.0, 40.0}, 1.0, 0.5), std::domain_error);
    REQUIRE_THROWS_AS(collapsibility_pipeline({0.0, 0.0}, 1.0, 1.0), std::invalid_argument);
}
