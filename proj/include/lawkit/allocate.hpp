#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "lawkit/isoflop.hpp"
#include "lawkit/laws.hpp"

namespace lawkit {

/// Optimal (N, D) split of one compute budget. a_exp + b_exp == 1 by
/// construction; 6 * n_opt * d_opt == budget_flops exactly for the
/// closed-form route (for frontier fits only up to 6*k_N*k_D ~ 1).
struct ComputeAllocation {
    double budget_flops = 0.0;
    double n_opt = 0.0;
    double d_opt = 0.0;
    std::optional<double> predicted_loss;
    double g_const = 0.0;
    double a_exp = 0.0;
    double b_exp = 0.0;
};

/// N_opt = G (C/6)^a, D_opt = G^-1 (C/6)^b with G = (alpha A / beta B)^(1/(alpha+beta)),
/// a = beta/(alpha+beta), b = alpha/(alpha+beta).
ComputeAllocation closed_form_allocation(const LawCoefficients& c, double budget_flops);

/// Reads both power laws off a fitted frontier; no loss model, so
/// predicted_loss is absent.
ComputeAllocation allocation_from_frontier(const FrontierFit& fits, double budget_flops);

struct EpochAllocation {
    double n_params = 0.0;
    double unique_tokens = 0.0;
    double e_opt = 0.0;
    double predicted_loss = 0.0;
    double flops_at_opt = 0.0;
    bool clamped_to_one = false;  // loss nondecreasing past e = 1
};

/// Longest useful training duration: argmin over e of the data-constrained
/// loss at fixed (N, U_D), solved by a 64-point geometric bracket plus
/// golden-section refinement. Throws "raise e_hi" when the minimum sits on
/// the upper bound.
EpochAllocation max_epochs(const DataLawCoefficients& c, double n_params,
                           double unique_tokens,
                           std::pair<double, double> e_bounds = {1.0, 1e6});

struct JointAllocation {
    double unique_tokens = 0.0;
    double n_opt = 0.0;
    double e_opt = 0.0;
    double predicted_loss = 0.0;
    double flops_at_opt = 0.0;
    bool on_boundary = false;
};

/// Joint (N, e) optimum at fixed U_D: 64x64 log-log grid scan, then
/// coordinate descent with per-axis golden sections until both axes move
/// less than 0.1% relative. Optima landing on the bounds are flagged.
JointAllocation joint_optimum(const DataLawCoefficients& c, double unique_tokens,
                              std::pair<double, double> n_bounds = {1e6, 1e13},
                              std::pair<double, double> e_bounds = {1.0, 1e6});

struct AllocationRow {
    double parameters = 0.0;
    double flops = 0.0;
    double tokens = 0.0;
};

/// Per model size, the compute and token budget that put it on the frontier.
std::vector<AllocationRow> allocation_table(const FrontierFit& fits,
                                            const std::vector<double>& param_list);
std::vector<AllocationRow> allocation_table(const LawCoefficients& c,
                                            const std::vector<double>& param_list);

struct ContourNode {
    double n_params = 0.0;
    double epochs = 0.0;
    double loss = 0.0;
};

struct ContourGrid {
    std::vector<ContourNode> nodes;  // row-major: N outer, e inner
    int n_resolution = 0;
    int e_resolution = 0;
    JointAllocation optimum;
};

ContourGrid contour_grid(const DataLawCoefficients& c, double unique_tokens,
                         std::pair<double, double> n_range,
                         std::pair<double, double> e_range, int n_resolution,
                         int e_resolution);

}  // namespace lawkit
