#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace offsetcate {

struct NewtonOptions {
    double grad_tol = 1e-9;        // 2-norm of the gradient at convergence
    int max_iters = 200;
    double hessian_fd_step = 1e-6;  // central differences of the analytic gradient
};

struct NewtonOutcome {
    std::vector<double> x;
    double value = 0.0;
    double grad_norm = 0.0;
    int iters = 0;
    bool converged = false;
};

namespace detail {

inline double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
}

// Gaussian elimination with partial pivoting; enough for the <=3-dimensional
// systems this project solves. Returns false on a (near-)singular matrix.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (!(std::abs(a[pivot][col]) > 1e-300)) return false;
        std::swap(a[pivot], a[col]);
        std::swap(b[pivot], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * out[c];
        out[ri] = s / a[ri][ri];
        if (!std::isfinite(out[ri])) return false;
    }
    return true;
}

}  // namespace detail

// Damped Newton ascent with an analytic gradient and a finite-difference
// Hessian (central differences of the gradient). The Hessian is
// Levenberg-regularized until the step is an ascent direction, and the step
// length backtracks on an Armijo condition. Deterministic: fixed evaluation
// order, no randomness.
template <typename ValueFn, typename GradFn>
NewtonOutcome newton_maximize(ValueFn&& value_fn, GradFn&& grad_fn,
                              std::vector<double> x, const NewtonOptions& opt = {}) {
    const std::size_t n = x.size();
    NewtonOutcome out;
    std::vector<double> grad = grad_fn(x);
    double fx = value_fn(x);
    for (int iter = 0; iter < opt.max_iters; ++iter) {
        const double gnorm = detail::norm2(grad);
        if (gnorm < opt.grad_tol) {
            out.iters = iter;
            out.converged = true;
            break;
        }
        out.iters = iter + 1;

        // Hessian of the objective = Jacobian of the gradient.
        std::vector<std::vector<double>> hess(n, std::vector<double>(n, 0.0));
        const double h = opt.hessian_fd_step;
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const std::vector<double> gp = grad_fn(xp);
            const std::vector<double> gm = grad_fn(xm);
            for (std::size_t i = 0; i < n; ++i) {
                hess[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double s = 0.5 * (hess[i][j] + hess[j][i]);
                hess[i][j] = s;
                hess[j][i] = s;
            }
        }

        double hscale = 0.0;
        for (std::size_t i = 0; i < n; ++i) hscale = std::max(hscale, std::abs(hess[i][i]));
        if (hscale == 0.0) hscale = 1.0;

        // Solve (-H + tau I) d = g, raising tau until d is an ascent direction.
        std::vector<double> dir;
        double tau = 0.0;
        bool have_dir = false;
        for (int attempt = 0; attempt < 12 && !have_dir; ++attempt) {
            std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) m[i][j] = -hess[i][j];
                m[i][i] += tau;
            }
            if (detail::solve_linear(m, grad, dir)) {
                double gd = 0.0;
                for (std::size_t i = 0; i < n; ++i) gd += grad[i] * dir[i];
                if (std::isfinite(gd) && gd > 0.0) have_dir = true;
            }
            if (!have_dir) tau = (tau == 0.0) ? 1e-8 * hscale : tau * 10.0;
        }
        if (!have_dir) dir = grad;  // steepest ascent fallback

        double gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) gd += grad[i] * dir[i];

        double alpha = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> xn = x;
            for (std::size_t i = 0; i < n; ++i) xn[i] += alpha * dir[i];
            const double fn = value_fn(xn);
            if (std::isfinite(fn) && fn >= fx + 1e-4 * alpha * gd) {
                x = std::move(xn);
                fx = fn;
                stepped = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!stepped) break;  // line search exhausted; report as-is
        grad = grad_fn(x);
    }
    out.grad_norm = detail::norm2(grad);
    if (out.grad_norm < opt.grad_tol) out.converged = true;
    out.x = std::move(x);
    out.value = fx;
    return out;
}

}  // namespace offsetcate
