#pragma once

#include <cmath>
#include <stdexcept>

namespace offsetcate {

// 1 / (1 + exp(-x)), evaluated without overflow on either tail.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + exp(x))
inline double softplus(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

// log(sigmoid(x)) = -softplus(-x); stays finite for |x| far beyond 50.
inline double log_sigmoid(double x) {
    return -softplus(-x);
}

// Inverse sigmoid, log(p) - log(1-p). Probabilities on the boundary have no
// finite log odds, so they are rejected instead of returning +/-inf.
inline double logit(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("logit: probability must lie strictly in (0,1)");
    }
    return std::log(p) - std::log(1.0 - p);
}

inline double odds(double p) { return p / (1.0 - p); }

}  // namespace offsetcate
