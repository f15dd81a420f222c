#include "minimize.hpp"

#include <algorithm>
#include <limits>

namespace lawkit::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
}

std::vector<double> central_gradient(const Objective& f, const std::vector<double>& x,
                                     double rel_step) {
    const std::size_t n = x.size();
    std::vector<double> g(n, 0.0);
    std::vector<double> probe = x;
    for (std::size_t i = 0; i < n; ++i) {
        const double h = rel_step * std::max(1.0, std::abs(x[i]));
        probe[i] = x[i] + h;
        const double fp = safe_eval(f, probe);
        probe[i] = x[i] - h;
        const double fm = safe_eval(f, probe);
        probe[i] = x[i];
        if (std::isinf(fp) || std::isinf(fm)) {
            g[i] = 0.0;  // subgradient fallback at an undefined edge
        } else {
            g[i] = (fp - fm) / (2.0 * h);
        }
    }
    return g;
}

}  // namespace

MinimizeResult bfgs_minimize(const Objective& f, std::vector<double> x0,
                             const MinimizeOptions& opts) {
    const std::size_t n = x0.size();
    MinimizeResult res;
    res.x = std::move(x0);
    res.fx = safe_eval(f, res.x);
    if (std::isinf(res.fx)) return res;  // hopeless start

    // Inverse-Hessian approximation, row-major, starts as identity.
    std::vector<double> h_inv(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) h_inv[i * n + i] = 1.0;

    std::vector<double> grad = central_gradient(f, res.x, opts.fd_step);
    int stall = 0;

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        res.iterations = iter + 1;

        // direction d = -H g
        std::vector<double> dir(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += h_inv[i * n + j] * grad[j];
            dir[i] = -acc;
        }
        double descent = 0.0;
        for (std::size_t i = 0; i < n; ++i) descent += dir[i] * grad[i];
        if (!(descent < 0.0)) {
            // reset to steepest descent if curvature info went bad
            for (std::size_t i = 0; i < n; ++i) {
                std::fill(h_inv.begin() + i * n, h_inv.begin() + (i + 1) * n, 0.0);
                h_inv[i * n + i] = 1.0;
                dir[i] = -grad[i];
            }
            descent = 0.0;
            for (std::size_t i = 0; i < n; ++i) descent += dir[i] * grad[i];
            if (!(descent < 0.0)) break;  // zero gradient
        }

        // Armijo backtracking
        const double c1 = 1e-4;
        double step = 1.0;
        double f_new = kInf;
        std::vector<double> x_new(n);
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
            f_new = safe_eval(f, x_new);
            if (f_new <= res.fx + c1 * step * descent) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no progress possible along this direction

        std::vector<double> grad_new = central_gradient(f, x_new, opts.fd_step);

        // BFGS update with curvature guard
        std::vector<double> s(n), y(n);
        double sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - res.x[i];
            y[i] = grad_new[i] - grad[i];
            sy += s[i] * y[i];
        }
        double s_norm = 0.0, y_norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s_norm += s[i] * s[i];
            y_norm += y[i] * y[i];
        }
        if (sy > 1e-12 * std::sqrt(s_norm * y_norm)) {
            const double rho = 1.0 / sy;
            // H_new = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            std::vector<double> hy(n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += h_inv[i * n + j] * y[j];
                hy[i] = acc;
            }
            double y_hy = 0.0;
            for (std::size_t i = 0; i < n; ++i) y_hy += y[i] * hy[i];
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    h_inv[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                                        rho * (1.0 + rho * y_hy) * s[i] * s[j];
                }
            }
        }

        const double prev = res.fx;
        res.x = std::move(x_new);
        res.fx = f_new;
        grad = std::move(grad_new);

        const double rel_drop = (prev - res.fx) / std::max(std::abs(prev), 1e-300);
        if (rel_drop < opts.rel_tolerance) {
            if (++stall >= opts.stall_iterations) {
                res.converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    return res;
}

}  // namespace lawkit::detail
