#include "lawkit/allocate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "lawkit/util.hpp"

namespace lawkit {

namespace {

// Golden-section minimum of f over [lo, hi] (log-space caller). Assumes the
// bracket was chosen around a grid argmin, so f is unimodal there.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double tol = 1e-10) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

struct LineMinimum {
    double x = 0.0;      // argmin
    double value = 0.0;  // f(argmin)
    bool at_lower = false;
    bool at_upper = false;
};

// Geometric 64-point scan plus golden refinement of f over [lo, hi] in
// log-space. Robust to the non-unimodal kink the data law has just past
// e = 1: edges are compared explicitly.
LineMinimum grid_golden_min(const std::function<double(double)>& f, double lo,
                            double hi, int grid_points = 64) {
    const auto grid = geomspace(lo, hi, grid_points);
    int best = 0;
    double best_val = f(grid[0]);
    for (int i = 1; i < grid_points; ++i) {
        const double v = f(grid[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double bracket_lo = grid[std::max(0, best - 1)];
    const double bracket_hi = grid[std::min(grid_points - 1, best + 1)];
    auto f_log = [&](double lx) { return f(std::exp(lx)); };
    double x = std::exp(golden_min(f_log, std::log(bracket_lo), std::log(bracket_hi)));
    double fx = f(x);

    // Edges can beat the golden candidate when the bracket straddles a kink.
    for (double cand : {lo, grid[best]}) {
        const double fc = f(cand);
        if (fc < fx) {
            fx = fc;
            x = cand;
        }
    }
    LineMinimum out;
    out.x = x;
    out.value = fx;
    out.at_lower = x <= lo * (1.0 + 1e-12);
    out.at_upper = best == grid_points - 1;
    return out;
}

}  // namespace

ComputeAllocation closed_form_allocation(const LawCoefficients& c, double budget_flops) {
    if (!(budget_flops > 0.0)) {
        throw std::invalid_argument("closed_form_allocation: budget must be positive");
    }
    if (!(c.alpha > 0.0) || !(c.beta > 0.0) || !(c.A > 0.0) || !(c.B > 0.0)) {
        throw std::invalid_argument("closed_form_allocation: need positive A, B, alpha, beta");
    }
    ComputeAllocation out;
    out.budget_flops = budget_flops;
    out.g_const = std::pow(c.alpha * c.A / (c.beta * c.B), 1.0 / (c.alpha + c.beta));
    out.a_exp = c.beta / (c.alpha + c.beta);
    out.b_exp = c.alpha / (c.alpha + c.beta);
    const double scaled = budget_flops / 6.0;
    out.n_opt = out.g_const * std::pow(scaled, out.a_exp);
    out.d_opt = std::pow(scaled, out.b_exp) / out.g_const;
    out.predicted_loss = eval_compute_law(c, out.n_opt, out.d_opt);
    return out;
}

ComputeAllocation allocation_from_frontier(const FrontierFit& fits, double budget_flops) {
    if (!(budget_flops > 0.0)) {
        throw std::invalid_argument("allocation_from_frontier: budget must be positive");
    }
    ComputeAllocation out;
    out.budget_flops = budget_flops;
    out.n_opt = fits.n_frontier.multiplier * std::pow(budget_flops, fits.n_frontier.exponent);
    out.d_opt = fits.d_frontier.multiplier * std::pow(budget_flops, fits.d_frontier.exponent);
    out.g_const = fits.n_frontier.multiplier;
    out.a_exp = fits.n_frontier.exponent;
    out.b_exp = fits.d_frontier.exponent;
    return out;
}

EpochAllocation max_epochs(const DataLawCoefficients& c, double n_params,
                           double unique_tokens, std::pair<double, double> e_bounds) {
    const auto [e_lo, e_hi] = e_bounds;
    if (!(e_lo >= 1.0) || !(e_hi > e_lo)) {
        throw std::invalid_argument("max_epochs: need e_lo >= 1 and e_hi > e_lo");
    }
    auto loss = [&](double e) { return eval_data_law(c, n_params, unique_tokens, e); };
    const auto line = grid_golden_min(loss, e_lo, e_hi);
    if (line.at_upper) {
        throw std::runtime_error("max_epochs: raise e_hi (minimum at the upper bound)");
    }
    EpochAllocation out;
    out.n_params = n_params;
    out.unique_tokens = unique_tokens;
    out.e_opt = line.x;
    out.predicted_loss = line.value;
    out.flops_at_opt = 6.0 * n_params * unique_tokens * line.x;
    out.clamped_to_one = line.at_lower && e_lo == 1.0;
    return out;
}

JointAllocation joint_optimum(const DataLawCoefficients& c, double unique_tokens,
                              std::pair<double, double> n_bounds,
                              std::pair<double, double> e_bounds) {
    const auto [n_lo, n_hi] = n_bounds;
    const auto [e_lo, e_hi] = e_bounds;
    if (!(n_lo > 0.0) || !(n_hi > n_lo) || !(e_lo >= 1.0) || !(e_hi > e_lo)) {
        throw std::invalid_argument("joint_optimum: degenerate bounds");
    }

    auto loss = [&](double n, double e) { return eval_data_law(c, n, unique_tokens, e); };

    // coarse scan
    const auto n_grid = geomspace(n_lo, n_hi, 64);
    const auto e_grid = geomspace(e_lo, e_hi, 64);
    double n_cur = n_grid[0], e_cur = e_grid[0];
    double best = loss(n_cur, e_cur);
    for (double n : n_grid) {
        for (double e : e_grid) {
            const double v = loss(n, e);
            if (v < best) {
                best = v;
                n_cur = n;
                e_cur = e;
            }
        }
    }

    bool on_boundary = false;
    for (int round = 0; round < 100; ++round) {
        const auto e_line =
            grid_golden_min([&](double e) { return loss(n_cur, e); }, e_lo, e_hi);
        const auto n_line =
            grid_golden_min([&](double n) { return loss(n, e_line.x); }, n_lo, n_hi);
        const double n_move = std::abs(n_line.x / n_cur - 1.0);
        const double e_move = std::abs(e_line.x / e_cur - 1.0);
        n_cur = n_line.x;
        e_cur = e_line.x;
        best = n_line.value;
        on_boundary = e_line.at_upper || n_line.at_upper ||
                      (e_line.at_lower && e_lo > 1.0) || n_line.at_lower;
        if (n_move < 1e-3 && e_move < 1e-3) break;
    }

    JointAllocation out;
    out.unique_tokens = unique_tokens;
    out.n_opt = n_cur;
    out.e_opt = e_cur;
    out.predicted_loss = best;
    out.flops_at_opt = 6.0 * n_cur * unique_tokens * e_cur;
    out.on_boundary = on_boundary;
    return out;
}

std::vector<AllocationRow> allocation_table(const FrontierFit& fits,
                                            const std::vector<double>& param_list) {
    if (param_list.empty()) throw std::invalid_argument("allocation_table: empty param list");
    if (!(fits.n_frontier.multiplier > 0.0) || fits.n_frontier.exponent == 0.0) {
        throw std::invalid_argument("allocation_table: degenerate frontier");
    }
    std::vector<AllocationRow> rows;
    rows.reserve(param_list.size());
    for (double n : param_list) {
        AllocationRow row;
        row.parameters = n;
        row.flops = std::pow(n / fits.n_frontier.multiplier, 1.0 / fits.n_frontier.exponent);
        row.tokens = fits.d_frontier.multiplier * std::pow(row.flops, fits.d_frontier.exponent);
        rows.push_back(row);
    }
    return rows;
}

std::vector<AllocationRow> allocation_table(const LawCoefficients& c,
                                            const std::vector<double>& param_list) {
    if (param_list.empty()) throw std::invalid_argument("allocation_table: empty param list");
    const auto probe = closed_form_allocation(c, 1.0);  // just for G, a
    std::vector<AllocationRow> rows;
    rows.reserve(param_list.size());
    for (double n : param_list) {
        AllocationRow row;
        row.parameters = n;
        row.flops = 6.0 * std::pow(n / probe.g_const, 1.0 / probe.a_exp);
        row.tokens = row.flops / (6.0 * n);
        rows.push_back(row);
    }
    return rows;
}

ContourGrid contour_grid(const DataLawCoefficients& c, double unique_tokens,
                         std::pair<double, double> n_range,
                         std::pair<double, double> e_range, int n_resolution,
                         int e_resolution) {
    if (n_resolution < 2 || e_resolution < 2) {
        throw std::invalid_argument("contour_grid: resolution must be >= 2 per axis");
    }
    ContourGrid grid;
    grid.n_resolution = n_resolution;
    grid.e_resolution = e_resolution;
    const auto ns = geomspace(n_range.first, n_range.second, n_resolution);
    const auto es = geomspace(e_range.first, e_range.second, e_resolution);
    grid.nodes.reserve(static_cast<std::size_t>(n_resolution) * e_resolution);
    for (double n : ns) {
        for (double e : es) {
            grid.nodes.push_back({n, e, eval_data_law(c, n, unique_tokens, e)});
        }
    }
    grid.optimum = joint_optimum(c, unique_tokens, n_range, e_range);
    return grid;
}

}  // namespace lawkit
