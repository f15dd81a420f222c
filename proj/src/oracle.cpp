#include "lawkit/oracle.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "lawkit/laws.hpp"
#include "lawkit/util.hpp"

namespace lawkit {

namespace {

std::vector<double> grid_values(const GridSpec& g, const char* name) {
    if (g.count < 1) {
        throw std::invalid_argument(std::string("synth_runs: empty grid '") + name + "'");
    }
    return geomspace(g.lo, g.hi, g.count);
}

}  // namespace

std::vector<RunRecord> synth_runs(const SynthSpec& spec) {
    if (spec.sigma < 0.0) throw std::invalid_argument("synth_runs: sigma must be >= 0");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // (N, U_D, e) triples; the compute law walks its D grid at one epoch.
    std::vector<std::array<double, 3>> points;
    const auto ns = grid_values(spec.n_grid, "n_grid");
    if (spec.law == LawKind::compute) {
        const auto ds = grid_values(spec.d_grid, "d_grid");
        for (double n : ns) {
            for (double d : ds) points.push_back({n, d, 1.0});
        }
    } else {
        const auto us = grid_values(spec.u_grid, "u_grid");
        const auto es = grid_values(spec.e_grid, "e_grid");
        for (double n : ns) {
            for (double u : us) {
                for (double e : es) points.push_back({n, u, e});
            }
        }
    }

    std::vector<RunRecord> records;
    records.reserve(points.size());
    std::size_t index = 0;
    for (const auto& [n, u, e] : points) {
        const double exact = eval_law(spec.law, spec.coefficients, n, u, e);
        const double noise = spec.sigma > 0.0 ? std::exp(spec.sigma * normal(rng)) : 1.0;
        RunRecord r;
        r.run_id = "synth-" + std::to_string(index++);
        r.n_params = n;
        r.unique_tokens = u;
        r.epochs = e;
        r.total_tokens = u * e;
        r.flops = 6.0 * n * r.total_tokens;
        r.final_train_loss = exact * noise;
        r.final_val_loss = r.final_train_loss;
        records.push_back(std::move(r));
    }
    return records;
}

EpochOptResult brute_force_epoch_opt(const DataLawCoefficients& c, double n_params,
                                     double unique_tokens, int grid_points,
                                     std::pair<double, double> e_bounds) {
    if (grid_points < 100) {
        throw std::invalid_argument("brute_force_epoch_opt: need >= 100 grid points");
    }
    const auto grid = geomspace(e_bounds.first, e_bounds.second, grid_points);
    EpochOptResult out;
    out.e = grid[0];
    out.loss = eval_data_law(c, n_params, unique_tokens, grid[0]);
    int best = 0;
    for (int i = 1; i < grid_points; ++i) {
        const double v = eval_data_law(c, n_params, unique_tokens, grid[i]);
        if (v < out.loss) {
            out.loss = v;
            out.e = grid[i];
            best = i;
        }
    }
    out.on_boundary = best == grid_points - 1;
    return out;
}

JointOptResult brute_force_joint_opt(const DataLawCoefficients& c, double unique_tokens,
                                     int n_points, int e_points,
                                     std::pair<double, double> n_bounds,
                                     std::pair<double, double> e_bounds) {
    if (n_points < 1 || e_points < 1) {
        throw std::invalid_argument("brute_force_joint_opt: empty grid");
    }
    const auto ns = geomspace(n_bounds.first, n_bounds.second, n_points);
    const auto es = geomspace(e_bounds.first, e_bounds.second, e_points);
    JointOptResult out;
    out.n = ns[0];
    out.e = es[0];
    out.loss = eval_data_law(c, ns[0], unique_tokens, es[0]);
    for (double n : ns) {
        for (double e : es) {
            const double v = eval_data_law(c, n, unique_tokens, e);
            if (v < out.loss) {
                out.loss = v;
                out.n = n;
                out.e = e;
            }
        }
    }
    return out;
}

}  // namespace lawkit
