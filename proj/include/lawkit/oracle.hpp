#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lawkit/ingest.hpp"
#include "lawkit/lawfit.hpp"

namespace lawkit {

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    int count = 0;
};

/// Synthetic run-log generator. For the compute law the record grid is
/// n_grid x d_grid (one epoch each); for the other laws it is
/// n_grid x u_grid x e_grid. Losses are the exact law value times a
/// seeded log-normal factor exp(sigma * z); sigma = 0 gives exact values.
struct SynthSpec {
    LawKind law = LawKind::compute;
    std::vector<double> coefficients;  // law order, raw values
    GridSpec n_grid;
    GridSpec d_grid;
    GridSpec u_grid;
    GridSpec e_grid;
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

std::vector<RunRecord> synth_runs(const SynthSpec& spec);

struct EpochOptResult {
    double e = 0.0;
    double loss = 0.0;
    bool on_boundary = false;  // argmin landed on the upper grid edge
};

/// Dense geometric scan over e; reference answer for max_epochs.
EpochOptResult brute_force_epoch_opt(const DataLawCoefficients& c, double n_params,
                                     double unique_tokens, int grid_points,
                                     std::pair<double, double> e_bounds = {1.0, 1e6});

struct JointOptResult {
    double n = 0.0;
    double e = 0.0;
    double loss = 0.0;
};

/// Full log-spaced grid argmin over (N, e); reference answer for joint_optimum.
JointOptResult brute_force_joint_opt(const DataLawCoefficients& c, double unique_tokens,
                                     int n_points, int e_points,
                                     std::pair<double, double> n_bounds = {1e6, 1e13},
                                     std::pair<double, double> e_bounds = {1.0, 1e6});

}  // namespace lawkit
