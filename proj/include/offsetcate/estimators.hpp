#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "offsetcate/causal.hpp"
#include "offsetcate/dgm.hpp"
#include "offsetcate/likelihood.hpp"
#include "offsetcate/newton.hpp"

namespace offsetcate {

enum class MethodId {
    ate_baseline,
    rct_reference,
    full_observational,
    conditional_offset,
    marginal_offset,
    constrained_offset,
};

inline constexpr std::array<MethodId, 6> all_methods{
    MethodId::ate_baseline,       MethodId::rct_reference,
    MethodId::full_observational, MethodId::conditional_offset,
    MethodId::marginal_offset,    MethodId::constrained_offset,
};

inline std::string_view method_name(MethodId m) {
    switch (m) {
        case MethodId::ate_baseline: return "ate_baseline";
        case MethodId::rct_reference: return "rct_reference";
        case MethodId::full_observational: return "full_observational";
        case MethodId::conditional_offset: return "conditional_offset";
        case MethodId::marginal_offset: return "marginal_offset";
        case MethodId::constrained_offset: return "constrained_offset";
    }
    return "unknown";
}

inline std::optional<MethodId> parse_method(std::string_view name) {
    for (MethodId m : all_methods) {
        if (method_name(m) == name) return m;
    }
    return std::nullopt;
}

// Result of any fit. outer_iters counts multiplier updates of the
// constrained solver (0 for unconstrained fits); inner_iters counts Newton
// iterations. constraint_residual is implied gamma minus the target for the
// constrained fit and 0 otherwise.
struct FitResult {
    ModelParams params;
    double loglik = -std::numeric_limits<double>::infinity();
    double grad_norm = std::numeric_limits<double>::infinity();
    double constraint_residual = 0.0;
    int outer_iters = 0;
    int inner_iters = 0;
    bool converged = false;
};

struct FitOptions {
    double grad_tol = 1e-9;
    int max_inner = 200;
};

namespace detail {

inline std::vector<double> free_values(const ModelParams& p) {
    std::vector<double> v;
    for (int i = 0; i < 3; ++i) {
        if (p.is_free[i]) v.push_back(p.coef[i]);
    }
    return v;
}

inline ModelParams embed_free(const ModelParams& shape, const std::vector<double>& v) {
    ModelParams p = shape;
    std::size_t k = 0;
    for (int i = 0; i < 3; ++i) {
        if (p.is_free[i]) p.coef[i] = v[k++];
    }
    return p;
}

}  // namespace detail

// Maximizes the expected log-likelihood over the free coefficients; fixed
// coefficients pass through untouched. Concave objective, so damped Newton
// converges from any start. Non-convergence is reported via the flag, never
// by returning a silently wrong answer.
inline FitResult fit_mle(const JointTable& table, const ModelParams& init,
                         const FitOptions& opts = {}) {
    init.validate();
    auto value = [&](const std::vector<double>& v) {
        return expected_loglik(detail::embed_free(init, v), table);
    };
    auto grad = [&](const std::vector<double>& v) {
        return grad_expected_loglik(detail::embed_free(init, v), table);
    };
    NewtonOptions nopts;
    nopts.grad_tol = opts.grad_tol;
    nopts.max_iters = opts.max_inner;
    const NewtonOutcome sol = newton_maximize(value, grad, detail::free_values(init), nopts);

    FitResult result;
    result.params = detail::embed_free(init, sol.x);
    result.loglik = sol.value;
    result.grad_norm = sol.grad_norm;
    result.inner_iters = sol.iters;
    result.converged = sol.converged;
    return result;
}

// Approach (1): all coefficients fit on the randomized-regime table.
inline FitResult fit_rct_reference(const ScmSpec& spec, const FitOptions& opts = {}) {
    return fit_mle(build_joint(spec.randomized()), ModelParams::all_free(), opts);
}

// Approach (3): the treatment coefficient recovered by the RCT reference is
// plugged into the observational fit as an offset.
inline FitResult fit_conditional_offset(const ScmSpec& spec, const FitOptions& opts = {}) {
    const FitResult rct = fit_rct_reference(spec, opts);
    ModelParams init = ModelParams::with_offset(rct.params.beta_t());
    FitResult result = fit_mle(build_joint(spec), init, opts);
    result.converged = result.converged && rct.converged;
    return result;
}

// Approach (4): the trial-reported marginal log odds-ratio is used as the
// offset in place of the conditional one.
inline FitResult fit_marginal_offset(const ScmSpec& spec, const FitOptions& opts = {}) {
    const double gamma_star = true_marginal_log_or(spec);
    return fit_mle(build_joint(spec), ModelParams::with_offset(gamma_star), opts);
}

struct ConstrainedOptions {
    double constraint_tol = 1e-8;
    double grad_tol = 1e-8;        // projected gradient at convergence
    double inner_grad_tol = 1e-9;
    int max_outer = 50;
    int max_inner = 200;
    double mu_init = 10.0;
    double mu_growth = 10.0;
    double required_shrink = 0.25;  // |c| must drop 4x per outer round
};

// Approach (5): maximize the observational likelihood subject to
//   implied_marginal_log_or(params) = gamma_star
// by an augmented Lagrangian: inner damped-Newton maximization of
//   L - lambda c - (mu/2) c^2,
// multiplier update lambda += mu c after each inner solve, penalty growth
// mu *= 10 whenever |c| fails to shrink by the required factor.
inline FitResult fit_constrained(const JointTable& table, double gamma_star,
                                 const std::array<double, 2>& x_weights,
                                 const ModelParams& init,
                                 const ConstrainedOptions& opts = {}) {
    if (init.n_free() != 3) {
        throw std::invalid_argument("fit_constrained: all three coefficients must be free");
    }

    auto constraint = [&](const ModelParams& p) {
        return implied_marginal_log_or(p, x_weights) - gamma_star;
    };

    double lambda = 0.0;
    double mu = opts.mu_init;
    double c_prev = std::numeric_limits<double>::infinity();

    FitResult result;
    result.params = init;
    std::vector<double> x = detail::free_values(init);

    NewtonOptions nopts;
    nopts.grad_tol = opts.inner_grad_tol;
    nopts.max_iters = opts.max_inner;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        auto value = [&](const std::vector<double>& v) {
            const ModelParams p = detail::embed_free(init, v);
            // A trial step can saturate the pooled implied-trial probability,
            // where the implied odds-ratio has no finite logit. Score such
            // points as -inf so the line search backs off; accepted iterates
            // always stay strictly interior.
            double c = 0.0;
            try {
                c = constraint(p);
            } catch (const std::domain_error&) {
                return -std::numeric_limits<double>::infinity();
            }
            return expected_loglik(p, table) - lambda * c - 0.5 * mu * c * c;
        };
        auto grad = [&](const std::vector<double>& v) {
            const ModelParams p = detail::embed_free(init, v);
            const double c = constraint(p);
            const auto gl = grad_expected_loglik_full(p, table);
            const auto gc = implied_marginal_log_or_grad(p, x_weights);
            const double scale = lambda + mu * c;
            return std::vector<double>{gl[0] - scale * gc[0], gl[1] - scale * gc[1],
                                       gl[2] - scale * gc[2]};
        };
        const NewtonOutcome sol = newton_maximize(value, grad, x, nopts);
        x = sol.x;
        result.inner_iters += sol.iters;
        result.outer_iters = outer + 1;

        const ModelParams p = detail::embed_free(init, x);
        const double c = constraint(p);
        lambda += mu * c;

        // Stationarity of the plain Lagrangian with the updated multiplier.
        const auto gl = grad_expected_loglik_full(p, table);
        const auto gc = implied_marginal_log_or_grad(p, x_weights);
        double proj = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double gi = gl[i] - lambda * gc[i];
            proj += gi * gi;
        }
        proj = std::sqrt(proj);

        result.params = p;
        result.loglik = expected_loglik(p, table);
        result.grad_norm = proj;
        result.constraint_residual = c;
        if (std::abs(c) < opts.constraint_tol && proj < opts.grad_tol) {
            result.converged = true;
            return result;
        }
        if (std::abs(c) > opts.required_shrink * c_prev) mu *= opts.mu_growth;
        c_prev = std::abs(c);
    }
    result.converged = false;
    return result;
}

// The ATE baseline predicts one trial-population average effect for
// everyone: p(y=1|do(t=1)) - p(y=1|do(t=0)) pooled over (x,u).
inline double ate_baseline(const ScmSpec& spec) { return true_ate(spec); }

}  // namespace offsetcate
