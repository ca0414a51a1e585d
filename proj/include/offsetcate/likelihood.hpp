#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "offsetcate/dgm.hpp"
#include "offsetcate/math.hpp"

namespace offsetcate {

// Coefficients of the logistic outcome model
//   eta(t,x) = beta0 + beta_t * t + beta_x * x
// together with a free/fixed mask. A fixed beta_t is the offset term of the
// treatment offset model; fixed coefficients are never touched by a fit.
struct ModelParams {
    std::array<double, 3> coef{0.0, 0.0, 0.0};      // beta0, beta_t, beta_x
    std::array<bool, 3> is_free{true, true, true};

    double beta0() const { return coef[0]; }
    double beta_t() const { return coef[1]; }
    double beta_x() const { return coef[2]; }

    double eta(int t, int x) const { return coef[0] + coef[1] * t + coef[2] * x; }

    int n_free() const {
        return static_cast<int>(is_free[0]) + static_cast<int>(is_free[1]) +
               static_cast<int>(is_free[2]);
    }

    void validate() const {
        if (n_free() == 0) {
            throw std::invalid_argument("ModelParams: at least one coefficient must be free");
        }
        for (double c : coef) {
            if (!std::isfinite(c)) {
                throw std::invalid_argument("ModelParams: coefficients must be finite");
            }
        }
    }

    static ModelParams all_free() { return ModelParams{}; }

    // Offset model: beta_t pinned at `offset`, baseline and covariate free.
    static ModelParams with_offset(double offset) {
        ModelParams p;
        p.coef[1] = offset;
        p.is_free[1] = false;
        return p;
    }

    // Covariate-free model (beta_x pinned at zero).
    static ModelParams no_covariate() {
        ModelParams p;
        p.is_free[2] = false;
        return p;
    }
};

// Expected Bernoulli log-likelihood of the model under the observational
// joint table:
//   sum_{u,x,t} p(u,x,t) [ pi_txu log sigma(eta) + (1-pi_txu) log(1-sigma(eta)) ]
// The u-sum collapses because eta does not depend on u. log-sigmoid keeps the
// evaluation finite for |eta| far past the sweep range.
inline double expected_loglik(const ModelParams& params, const JointTable& table) {
    double total = 0.0;
    for (int t = 0; t < 2; ++t) {
        for (int x = 0; x < 2; ++x) {
            const double eta = params.eta(t, x);
            const double m1 = table.mass_txy1(t, x);
            const double m0 = table.mass_tx(t, x) - m1;
            total += m1 * log_sigmoid(eta) + m0 * log_sigmoid(-eta);
        }
    }
    return total;
}

// Analytic gradient over all three coefficients, free or not.
inline std::array<double, 3> grad_expected_loglik_full(const ModelParams& params,
                                                       const JointTable& table) {
    std::array<double, 3> grad{0.0, 0.0, 0.0};
    for (int t = 0; t < 2; ++t) {
        for (int x = 0; x < 2; ++x) {
            const double s = sigmoid(params.eta(t, x));
            const double m1 = table.mass_txy1(t, x);
            const double m0 = table.mass_tx(t, x) - m1;
            const double w = m1 * (1.0 - s) - m0 * s;
            grad[0] += w;
            grad[1] += w * t;
            grad[2] += w * x;
        }
    }
    return grad;
}

// Gradient restricted to the free coefficients, in coefficient order.
inline std::vector<double> grad_expected_loglik(const ModelParams& params,
                                                const JointTable& table) {
    const auto full = grad_expected_loglik_full(params, table);
    std::vector<double> g;
    g.reserve(params.n_free());
    for (int i = 0; i < 3; ++i) {
        if (params.is_free[i]) g.push_back(full[i]);
    }
    return g;
}

// d/d beta0 of the expected offset log-likelihood, evaluated at the ground
// truth (beta0*, beta_t*) of the covariate-free confounded mechanism:
//   p_u (1-p_u) [ (pi01-pi00)(p(t=0|u=1)-p(t=0|u=0))
//               + (pi11-pi10)(p(t=1|u=1)-p(t=1|u=0)) ]
// Nonzero in general for confounded mechanisms with unrestricted pi[t][u].
// On the no-intercept ScmSpec subfamily pi01-pi00 == pi11-pi10 holds
// identically and the two terms cancel exactly, so there the ground truth
// *is* a stationary point; see the tests for both behaviours.
inline double grad_at_truth_closed_form(const Example1Dgm& dgm) {
    dgm.validate();
    const double d_t0 = (1.0 - dgm.p_t1_u1) - (1.0 - dgm.p_t1_u0);
    const double d_t1 = dgm.p_t1_u1 - dgm.p_t1_u0;
    return dgm.p_u * (1.0 - dgm.p_u) *
           ((dgm.pi[0][1] - dgm.pi[0][0]) * d_t0 + (dgm.pi[1][1] - dgm.pi[1][0]) * d_t1);
}

// Convenience entry for covariate-free ScmSpecs (beta_x must be zero).
inline double grad_at_truth_closed_form(const ScmSpec& spec) {
    return grad_at_truth_closed_form(Example1Dgm::from_spec(spec));
}

// The second baseline with the same treatment effect on the probability
// scale, from the sigmoid symmetry sigma(x) = 1 - sigma(-x).
inline double alt_baseline_solution(double beta0_star, double beta_t_star) {
    return -(beta0_star + beta_t_star);
}

// All beta0 with sigma(beta0 + beta_t) - sigma(beta0) = delta. Substituting
// y = exp(beta0) gives the quadratic
//   delta e^b y^2 + (delta (1 + e^b) - e^b + 1) y + delta = 0,
// whose strictly positive roots map back through log. Returns 0, 1 or 2
// values in ascending order; an unattainable delta yields none. delta == 0
// with beta_t == 0 is degenerate (every beta0 qualifies) and also returns
// none.
inline std::vector<double> cate_level_set_roots(double delta, double beta_t) {
    if (!(std::abs(delta) < 1.0)) {
        throw std::invalid_argument("cate_level_set_roots: |delta| must be < 1");
    }
    std::vector<double> roots;
    if (delta == 0.0) {
        return roots;  // beta_t == 0: degenerate; beta_t != 0: only root y = 0
    }
    const double eb = std::exp(beta_t);
    const double a = delta * eb;
    const double b = delta * (1.0 + eb) - eb + 1.0;
    const double c = delta;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return roots;
    // Numerically stable pair: q/a and c/q avoid cancellation in -b +/- sqrt.
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    std::array<double, 2> ys{};
    int n = 0;
    if (q != 0.0) {
        ys[n++] = q / a;
        ys[n++] = c / q;
    } else {
        ys[n++] = 0.0;  // b == 0 and disc == 0
    }
    for (int i = 0; i < n; ++i) {
        if (ys[i] > 0.0) roots.push_back(std::log(ys[i]));
    }
    std::sort(roots.begin(), roots.end());
    if (roots.size() == 2 &&
        std::abs(roots[1] - roots[0]) <= 1e-12 * (1.0 + std::abs(roots[0]))) {
        roots.pop_back();
    }
    return roots;
}

}  // namespace offsetcate
