#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "offsetcate/math.hpp"

namespace offsetcate {

enum class Regime { observational, randomized };

// Fully discrete structural causal model over binary (u, x, t, y).
//
// Outcome mechanism (the +/-1/2 coding keeps each coefficient an entire
// log odds-ratio):
//   p(y=1|t,x,u) = sigmoid(0.5*(beta_t*(2t-1) + beta_x*(2x-1) + beta_uy*(2u-1)))
// Treatment mechanism: p(t=1|u) = sigmoid(0.5*beta_ut*(2u-1)) under the
// observational regime, 1/2 under randomization.
// When `alpha` is set, u and x are coupled via p(u=1|x=0) = alpha,
// p(u=1|x=1) = 1 - alpha, and `p_u` is ignored.
struct ScmSpec {
    double p_u = 0.5;
    double p_x = 0.5;
    std::optional<double> alpha;
    double beta_t = 0.0;
    double beta_x = 0.0;
    double beta_ut = 0.0;
    double beta_uy = 0.0;
    Regime regime = Regime::observational;

    void validate() const {
        auto check_prob = [](double p, const char* name) {
            if (!(p > 0.0 && p < 1.0)) {
                throw std::invalid_argument(std::string(name) +
                                            " must lie strictly in (0,1)");
            }
        };
        check_prob(p_u, "p_u");
        check_prob(p_x, "p_x");
        if (alpha) check_prob(*alpha, "alpha");
        for (double b : {beta_t, beta_x, beta_ut, beta_uy}) {
            if (!std::isfinite(b)) {
                throw std::invalid_argument("coefficients must be finite");
            }
        }
    }

    double p_u_given_x(int x) const {
        if (alpha) return x == 0 ? *alpha : 1.0 - *alpha;
        return p_u;
    }

    // Marginal p(u=1); equals p_u unless the alpha coupling is active.
    double p_u_marginal() const {
        if (!alpha) return p_u;
        return p_x * (1.0 - *alpha) + (1.0 - p_x) * (*alpha);
    }

    double treat_prob(int u) const {
        if (regime == Regime::randomized) return 0.5;
        return sigmoid(0.5 * beta_ut * (2.0 * u - 1.0));
    }

    double outcome_prob(int t, int x, int u) const {
        return sigmoid(0.5 * (beta_t * (2.0 * t - 1.0) + beta_x * (2.0 * x - 1.0) +
                              beta_uy * (2.0 * u - 1.0)));
    }

    ScmSpec randomized() const {
        ScmSpec s = *this;
        s.regime = Regime::randomized;
        return s;
    }
};

// Exact 16-entry joint probability table over (u, x, t, y).
struct JointTable {
    std::array<double, 16> prob{};

    static constexpr int index(int u, int x, int t, int y) {
        return ((u * 2 + x) * 2 + t) * 2 + y;
    }
    double operator()(int u, int x, int t, int y) const {
        return prob[index(u, x, t, y)];
    }
    double& at(int u, int x, int t, int y) { return prob[index(u, x, t, y)]; }

    double sum() const {
        double s = 0.0;
        for (double p : prob) s += p;
        return s;
    }

    // p(t,x) and p(y=1|t,x) building blocks.
    double mass_tx(int t, int x) const {
        double s = 0.0;
        for (int u = 0; u < 2; ++u)
            for (int y = 0; y < 2; ++y) s += (*this)(u, x, t, y);
        return s;
    }
    double mass_txy1(int t, int x) const {
        double s = 0.0;
        for (int u = 0; u < 2; ++u) s += (*this)(u, x, t, 1);
        return s;
    }
};

inline JointTable build_joint(const ScmSpec& spec) {
    spec.validate();
    JointTable table;
    for (int x = 0; x < 2; ++x) {
        const double px = x == 1 ? spec.p_x : 1.0 - spec.p_x;
        const double pu1 = spec.p_u_given_x(x);
        for (int u = 0; u < 2; ++u) {
            const double pux = (u == 1 ? pu1 : 1.0 - pu1) * px;
            const double pt1 = spec.treat_prob(u);
            for (int t = 0; t < 2; ++t) {
                const double ptux = pux * (t == 1 ? pt1 : 1.0 - pt1);
                const double py1 = spec.outcome_prob(t, x, u);
                table.at(u, x, t, 1) = ptux * py1;
                table.at(u, x, t, 0) = ptux * (1.0 - py1);
            }
        }
    }
    return table;
}

// p(y=1|t,x) for the four observed strata, indexed [t][x].
struct ConditionalOutcome {
    std::array<std::array<double, 2>, 2> p{};
    double operator()(int t, int x) const { return p[t][x]; }
};

inline ConditionalOutcome observational_conditional(const JointTable& table) {
    ConditionalOutcome cond;
    for (int t = 0; t < 2; ++t) {
        for (int x = 0; x < 2; ++x) {
            const double mass = table.mass_tx(t, x);
            if (!(mass > 0.0)) {
                throw std::runtime_error(
                    "observational_conditional: zero probability mass in cell (t=" +
                    std::to_string(t) + ", x=" + std::to_string(x) + ")");
            }
            cond.p[t][x] = table.mass_txy1(t, x) / mass;
        }
    }
    return cond;
}

// {p(x=0), p(x=1)} from the joint table.
inline std::array<double, 2> x_marginal(const JointTable& table) {
    std::array<double, 2> w{0.0, 0.0};
    for (int u = 0; u < 2; ++u)
        for (int x = 0; x < 2; ++x)
            for (int t = 0; t < 2; ++t)
                for (int y = 0; y < 2; ++y) w[x] += table(u, x, t, y);
    return w;
}

// The covariate-free binary-confounder mechanism with unrestricted outcome
// probabilities: u ~ B(p_u), t ~ B(p(t=1|u)), y ~ B(pi[t][u]). The ScmSpec
// outcome family is the no-intercept subfamily of this; several identities
// (notably the likelihood gradient at the ground truth) behave differently
// on the full family, so it gets its own type.
struct Example1Dgm {
    double p_u = 0.5;
    double p_t1_u0 = 0.5;  // p(t=1|u=0)
    double p_t1_u1 = 0.5;  // p(t=1|u=1)
    std::array<std::array<double, 2>, 2> pi{};  // pi[t][u] = p(y=1|t,u)

    void validate() const {
        auto check_prob = [](double p, const char* name) {
            if (!(p > 0.0 && p < 1.0)) {
                throw std::invalid_argument(std::string(name) +
                                            " must lie strictly in (0,1)");
            }
        };
        check_prob(p_u, "p_u");
        check_prob(p_t1_u0, "p_t1_u0");
        check_prob(p_t1_u1, "p_t1_u1");
        for (int t = 0; t < 2; ++t)
            for (int u = 0; u < 2; ++u) check_prob(pi[t][u], "pi");
    }

    // Requires beta_x == 0: with a covariate effect the model is no longer
    // the covariate-free Example-1 shape.
    static Example1Dgm from_spec(const ScmSpec& spec) {
        spec.validate();
        if (spec.beta_x != 0.0) {
            throw std::invalid_argument(
                "Example1Dgm::from_spec requires beta_x == 0");
        }
        Example1Dgm d;
        d.p_u = spec.p_u_marginal();
        d.p_t1_u0 = spec.treat_prob(0);
        d.p_t1_u1 = spec.treat_prob(1);
        for (int t = 0; t < 2; ++t)
            for (int u = 0; u < 2; ++u) d.pi[t][u] = spec.outcome_prob(t, 0, u);
        return d;
    }

    // p(y=1|do(t)) = (1-p_u)*pi[t][0] + p_u*pi[t][1]
    double interventional(int t) const {
        return (1.0 - p_u) * pi[t][0] + p_u * pi[t][1];
    }
    double ground_truth_beta0() const { return logit(interventional(0)); }
    double ground_truth_beta_t() const {
        return logit(interventional(1)) - logit(interventional(0));
    }
};

// Embeds the covariate-free mechanism in a 16-cell table; x is an
// independent spectator with p(x=1) = p_x.
inline JointTable joint_from_example1(const Example1Dgm& dgm, double p_x = 0.5) {
    dgm.validate();
    if (!(p_x > 0.0 && p_x < 1.0)) {
        throw std::invalid_argument("p_x must lie strictly in (0,1)");
    }
    JointTable table;
    for (int u = 0; u < 2; ++u) {
        const double pu = u == 1 ? dgm.p_u : 1.0 - dgm.p_u;
        const double pt1 = u == 1 ? dgm.p_t1_u1 : dgm.p_t1_u0;
        for (int x = 0; x < 2; ++x) {
            const double pux = pu * (x == 1 ? p_x : 1.0 - p_x);
            for (int t = 0; t < 2; ++t) {
                const double ptux = pux * (t == 1 ? pt1 : 1.0 - pt1);
                table.at(u, x, t, 1) = ptux * dgm.pi[t][u];
                table.at(u, x, t, 0) = ptux * (1.0 - dgm.pi[t][u]);
            }
        }
    }
    return table;
}

}  // namespace offsetcate
