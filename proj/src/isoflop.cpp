#include "lawkit/isoflop.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lawkit/csv.hpp"

namespace lawkit {

GroupingResult group_runs(const std::vector<RunRecord>& records,
                          const std::vector<double>& budgets, double tol) {
    if (!(tol > 0.0) || !(tol < 0.5)) {
        throw std::invalid_argument("group_runs: tol must be in (0, 0.5)");
    }
    if (budgets.empty()) throw std::invalid_argument("group_runs: no budgets");

    std::vector<IsoflopGroup> groups(budgets.size());
    for (std::size_t b = 0; b < budgets.size(); ++b) groups[b].budget_flops = budgets[b];

    for (const auto& r : records) {
        int best = -1;
        double best_dist = tol;
        for (std::size_t b = 0; b < budgets.size(); ++b) {
            const double dist = std::abs(r.flops / budgets[b] - 1.0);
            if (dist <= best_dist) {
                best_dist = dist;
                best = static_cast<int>(b);
            }
        }
        if (best >= 0) groups[best].points.push_back({r.n_params, r.final_train_loss});
    }

    GroupingResult out;
    for (auto& g : groups) {
        std::set<double> distinct;
        for (const auto& p : g.points) distinct.insert(p.n_params);
        if (distinct.size() >= 3) {
            out.groups.push_back(std::move(g));
        } else {
            out.warnings.push_back("budget " + csv::format_double(g.budget_flops) +
                                   ": only " + std::to_string(distinct.size()) +
                                   " distinct model sizes, dropped");
        }
    }
    if (out.groups.empty()) throw std::runtime_error("group_runs: no groups formed");
    return out;
}

ParabolaFit fit_parabola(const IsoflopGroup& group) {
    const std::size_t n = group.points.size();
    if (n < 3) throw std::invalid_argument("fit_parabola: need >= 3 points");

    // Work in centered x for conditioning; shift coefficients back at the end.
    double mean_x = 0.0;
    for (const auto& p : group.points) mean_x += std::log10(p.n_params);
    mean_x /= static_cast<double>(n);

    // Normal equations for y = c2 u^2 + c1 u + c0, u = x - mean_x.
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    double sy = 0, sxy = 0, sx2y = 0;
    for (const auto& p : group.points) {
        const double u = std::log10(p.n_params) - mean_x;
        const double u2 = u * u;
        s1 += u;
        s2 += u2;
        s3 += u2 * u;
        s4 += u2 * u2;
        sy += p.final_loss;
        sxy += u * p.final_loss;
        sx2y += u2 * p.final_loss;
    }
    const double s0 = static_cast<double>(n);
    // Solve the symmetric 3x3 [s4 s3 s2; s3 s2 s1; s2 s1 s0] c = [sx2y; sxy; sy].
    const double det = s4 * (s2 * s0 - s1 * s1) - s3 * (s3 * s0 - s1 * s2) +
                       s2 * (s3 * s1 - s2 * s2);
    if (std::abs(det) < 1e-12) {
        throw std::runtime_error("fit_parabola: no valley (degenerate design)");
    }
    const double c2 = (sx2y * (s2 * s0 - s1 * s1) - s3 * (sxy * s0 - sy * s1) +
                       s2 * (sxy * s1 - sy * s2)) /
                      det;
    const double c1 = (s4 * (sxy * s0 - sy * s1) - sx2y * (s3 * s0 - s1 * s2) +
                       s2 * (s3 * sy - sxy * s2)) /
                      det;
    const double c0 = (s4 * (s2 * sy - sxy * s1) - s3 * (s3 * sy - sxy * s2) +
                       sx2y * (s3 * s1 - s2 * s2)) /
                      det;

    if (!(c2 > 0.0)) {
        throw std::runtime_error("fit_parabola: no valley (loss not convex across sizes)");
    }

    ParabolaFit fit;
    fit.a2 = c2;
    fit.a1 = c1 - 2.0 * c2 * mean_x;
    fit.a0 = c0 - c1 * mean_x + c2 * mean_x * mean_x;

    const double vertex_x = -fit.a1 / (2.0 * fit.a2);
    fit.vertex_n_params = std::pow(10.0, vertex_x);
    fit.vertex_loss = (fit.a2 * vertex_x + fit.a1) * vertex_x + fit.a0;

    double min_x = std::log10(group.points.front().n_params);
    double max_x = min_x;
    for (const auto& p : group.points) {
        min_x = std::min(min_x, std::log10(p.n_params));
        max_x = std::max(max_x, std::log10(p.n_params));
    }
    fit.extrapolated = vertex_x < min_x || vertex_x > max_x;
    return fit;
}

namespace {

PowerLawFit ols_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lx = std::log10(x[i]);
        const double ly = std::log10(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) {
        throw std::runtime_error("fit_frontier: budgets are not distinct");
    }
    PowerLawFit fit;
    fit.exponent = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.exponent * sx) / n;
    fit.multiplier = std::pow(10.0, intercept);
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pred = intercept + fit.exponent * std::log10(x[i]);
        const double res = pred - std::log10(y[i]);
        rss += res * res;
    }
    fit.residual = rss / static_cast<double>(n);
    return fit;
}

}  // namespace

FrontierFit fit_frontier(const std::vector<FrontierMinimum>& minima,
                         bool include_extrapolated) {
    std::vector<double> budgets, n_opt, d_opt;
    for (const auto& m : minima) {
        if (m.extrapolated && !include_extrapolated) continue;
        budgets.push_back(m.budget_flops);
        n_opt.push_back(m.vertex_n_params);
        d_opt.push_back(m.budget_flops / (6.0 * m.vertex_n_params));
    }
    if (budgets.size() < 2) {
        throw std::runtime_error("fit_frontier: need >= 2 usable minima");
    }
    FrontierFit fit;
    fit.n_frontier = ols_loglog(budgets, n_opt);
    fit.d_frontier = ols_loglog(budgets, d_opt);
    return fit;
}

}  // namespace lawkit
