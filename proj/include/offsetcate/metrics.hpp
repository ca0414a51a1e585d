#pragma once

#include <array>
#include <cmath>

#include "offsetcate/causal.hpp"
#include "offsetcate/dgm.hpp"
#include "offsetcate/estimators.hpp"
#include "offsetcate/likelihood.hpp"
#include "offsetcate/math.hpp"

namespace offsetcate {

// Model-implied treatment effect on the probability scale at covariate x.
inline double predicted_cate(const ModelParams& params, int x) {
    return sigmoid(params.eta(1, x)) - sigmoid(params.eta(0, x));
}

inline double predicted_cate(const FitResult& fit, int x) {
    return predicted_cate(fit.params, x);
}

// Per-covariate predicted difference in outcome probability; a constant
// prediction is the ATE baseline.
struct CatePrediction {
    std::array<double, 2> value{0.0, 0.0};

    double operator()(int x) const { return value[x]; }

    static CatePrediction constant(double v) { return CatePrediction{{v, v}}; }
    static CatePrediction from_params(const ModelParams& p) {
        return CatePrediction{{predicted_cate(p, 0), predicted_cate(p, 1)}};
    }
    static CatePrediction from_fit(const FitResult& fit) {
        return from_params(fit.params);
    }
};

// Root-mean-squared error of the predicted vs. true treatment effect,
// weighted by the exact covariate distribution:
//   sqrt( sum_x p(x) (CATE(x) - pred(x))^2 )
inline double pehe(const CatePrediction& pred, const ScmSpec& spec) {
    const InterventionalTable it = interventional(spec);
    double s = 0.0;
    for (int x = 0; x < 2; ++x) {
        const double w = x == 1 ? spec.p_x : 1.0 - spec.p_x;
        const double err = (it(1, x) - it(0, x)) - pred(x);
        s += w * err * err;
    }
    return std::sqrt(s);
}

}  // namespace offsetcate
