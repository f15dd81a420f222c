#pragma once

#include <string>
#include <vector>

#include "lawkit/ingest.hpp"

namespace lawkit {

struct IsoflopPoint {
    double n_params = 0.0;
    double final_loss = 0.0;
};

/// Runs sharing one FLOPs budget; needs >= 3 distinct model sizes so the
/// parabola is determined.
struct IsoflopGroup {
    double budget_flops = 0.0;
    std::vector<IsoflopPoint> points;
};

/// Quadratic in x = log10(n_params): loss ~ a2*x^2 + a1*x + a0.
/// extrapolated is set when the vertex falls outside the sampled x range.
struct ParabolaFit {
    double a2 = 0.0;
    double a1 = 0.0;
    double a0 = 0.0;
    double vertex_n_params = 0.0;
    double vertex_loss = 0.0;
    bool extrapolated = false;
};

/// y = multiplier * x^exponent, fitted by least squares in log10-log10.
/// residual is the mean squared log10 error.
struct PowerLawFit {
    double multiplier = 0.0;
    double exponent = 0.0;
    double residual = 0.0;
};

struct GroupingResult {
    std::vector<IsoflopGroup> groups;
    std::vector<std::string> warnings;  // dropped budgets / unassigned notes
};

/// Buckets records by relative distance |C/budget - 1| <= tol. A record
/// joins at most one budget (the nearest). Groups with fewer than 3 distinct
/// model sizes are dropped with a warning. Throws if no group survives.
GroupingResult group_runs(const std::vector<RunRecord>& records,
                          const std::vector<double>& budgets, double tol);

/// Least-squares parabola over (log10 N, loss). Throws "no valley" when the
/// fitted curvature is not positive.
ParabolaFit fit_parabola(const IsoflopGroup& group);

struct FrontierMinimum {
    double budget_flops = 0.0;
    double vertex_n_params = 0.0;
    double vertex_loss = 0.0;
    bool extrapolated = false;
};

struct FrontierFit {
    PowerLawFit n_frontier;
    PowerLawFit d_frontier;
};

/// Fits N_opt(C) on the vertices, derives D_opt = C/(6 N_opt) per budget and
/// fits it the same way. Vertices flagged extrapolated are excluded unless
/// include_extrapolated is set. Needs >= 2 usable points.
FrontierFit fit_frontier(const std::vector<FrontierMinimum>& minima,
                         bool include_extrapolated = false);

}  // namespace lawkit
