#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>

#include "offsetcate/dgm.hpp"
#include "offsetcate/likelihood.hpp"
#include "offsetcate/math.hpp"

namespace offsetcate {

// p(y=1|do(t),x), indexed [t][x].
struct InterventionalTable {
    std::array<std::array<double, 2>, 2> pi{};
    double operator()(int t, int x) const { return pi[t][x]; }
};

// Intervening on t cuts the u -> t edge, so the confounder is averaged with
// its x-conditional weights: pi_t(x) = sum_u p(u|x) p(y=1|t,x,u).
inline InterventionalTable interventional(const ScmSpec& spec) {
    spec.validate();
    InterventionalTable out;
    for (int x = 0; x < 2; ++x) {
        const double pu1 = spec.p_u_given_x(x);
        for (int t = 0; t < 2; ++t) {
            out.pi[t][x] = (1.0 - pu1) * spec.outcome_prob(t, x, 0) +
                           pu1 * spec.outcome_prob(t, x, 1);
        }
    }
    return out;
}

inline double true_cate(const ScmSpec& spec, int x) {
    const InterventionalTable t = interventional(spec);
    return t(1, x) - t(0, x);
}

// p(y=1|do(t)) pooled over the covariate distribution.
inline double interventional_marginal(const ScmSpec& spec, int t) {
    const InterventionalTable tab = interventional(spec);
    return (1.0 - spec.p_x) * tab(t, 0) + spec.p_x * tab(t, 1);
}

inline double true_ate(const ScmSpec& spec) {
    return interventional_marginal(spec, 1) - interventional_marginal(spec, 0);
}

// The marginal log odds-ratio a large trial in this population would report:
// logit p(y=1|do(t=1)) - logit p(y=1|do(t=0)).
inline double true_marginal_log_or(const ScmSpec& spec) {
    return logit(interventional_marginal(spec, 1)) -
           logit(interventional_marginal(spec, 0));
}

// The marginal log odds-ratio implied by a fitted conditional model: pool
// the model's two interventional curves over p(x), then take the logit gap.
// Treatment assignment probabilities never enter.
inline double implied_marginal_log_or(const ModelParams& params,
                                      const std::array<double, 2>& x_weights) {
    double p1 = 0.0;
    double p0 = 0.0;
    for (int x = 0; x < 2; ++x) {
        p1 += x_weights[x] * sigmoid(params.eta(1, x));
        p0 += x_weights[x] * sigmoid(params.eta(0, x));
    }
    return logit(p1) - logit(p0);
}

// Analytic gradient of implied_marginal_log_or in (beta0, beta_t, beta_x).
inline std::array<double, 3> implied_marginal_log_or_grad(
    const ModelParams& params, const std::array<double, 2>& x_weights) {
    double p1 = 0.0, p0 = 0.0;
    std::array<double, 3> dp1{0.0, 0.0, 0.0};
    std::array<double, 3> dp0{0.0, 0.0, 0.0};
    for (int x = 0; x < 2; ++x) {
        const double s1 = sigmoid(params.eta(1, x));
        const double s0 = sigmoid(params.eta(0, x));
        const double w = x_weights[x];
        p1 += w * s1;
        p0 += w * s0;
        const double d1 = w * s1 * (1.0 - s1);
        const double d0 = w * s0 * (1.0 - s0);
        dp1[0] += d1;
        dp1[1] += d1;
        dp1[2] += d1 * x;
        dp0[0] += d0;
        dp0[2] += d0 * x;
    }
    const double j1 = 1.0 / (p1 * (1.0 - p1));
    const double j0 = 1.0 / (p0 * (1.0 - p0));
    return {dp1[0] * j1 - dp0[0] * j0, dp1[1] * j1 - dp0[1] * j0,
            dp1[2] * j1 - dp0[2] * j0};
}

// Finite-sample variant: the pooling expectation is replaced by the mean
// over observed covariate values.
inline double implied_marginal_log_or_empirical(const ModelParams& params,
                                                std::span<const int> xs) {
    if (xs.empty()) {
        throw std::invalid_argument("implied_marginal_log_or_empirical: no observations");
    }
    std::size_t ones = 0;
    for (int x : xs) {
        if (x != 0 && x != 1) {
            throw std::invalid_argument("implied_marginal_log_or_empirical: x must be 0 or 1");
        }
        ones += static_cast<std::size_t>(x);
    }
    const double p1 = static_cast<double>(ones) / static_cast<double>(xs.size());
    return implied_marginal_log_or(params, {1.0 - p1, p1});
}

// One covariate stratum of the marginal-vs-conditional odds-ratio
// computation, with the pooled quantities repeated on both rows the way the
// reference table lays them out.
struct CollapsibilityRow {
    int x = 0;
    double eta0 = 0.0;       // log odds of the untreated risk at this x
    double eta1 = 0.0;       // log odds of the treated risk at this x
    double pi0_x = 0.0;      // untreated risk at this x
    double pi1_x = 0.0;      // treated risk at this x
    double pi0 = 0.0;        // pooled untreated risk
    double pi1 = 0.0;        // pooled treated risk
    double eta0_marg = 0.0;  // logit of pooled untreated risk
    double eta1_marg = 0.0;  // logit of pooled treated risk
    double gamma_t = 0.0;    // marginal log odds-ratio, eta1_marg - eta0_marg
};

// The step-by-step pooling computation: per-x risks from the baseline log
// odds and the shared conditional log odds-ratio, pooled over p(x=1), then
// back to the log-odds scale. Pooled risks that land on {0,1} have no logit
// and are rejected by the guard inside logit().
inline std::array<CollapsibilityRow, 2> collapsibility_pipeline(
    const std::array<double, 2>& beta0_of_x, double beta_t, double p_x1) {
    if (!(p_x1 > 0.0 && p_x1 < 1.0)) {
        throw std::invalid_argument("collapsibility_pipeline: p_x1 must lie in (0,1)");
    }
    std::array<CollapsibilityRow, 2> rows;
    for (int x = 0; x < 2; ++x) {
        rows[x].x = x;
        rows[x].eta0 = beta0_of_x[x];
        rows[x].eta1 = beta0_of_x[x] + beta_t;
        rows[x].pi0_x = sigmoid(rows[x].eta0);
        rows[x].pi1_x = sigmoid(rows[x].eta1);
    }
    const double pi0 = (1.0 - p_x1) * rows[0].pi0_x + p_x1 * rows[1].pi0_x;
    const double pi1 = (1.0 - p_x1) * rows[0].pi1_x + p_x1 * rows[1].pi1_x;
    const double eta0_marg = logit(pi0);
    const double eta1_marg = logit(pi1);
    for (auto& row : rows) {
        row.pi0 = pi0;
        row.pi1 = pi1;
        row.eta0_marg = eta0_marg;
        row.eta1_marg = eta1_marg;
        row.gamma_t = eta1_marg - eta0_marg;
    }
    return rows;
}

}  // namespace offsetcate
