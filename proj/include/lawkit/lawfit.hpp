#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lawkit/ingest.hpp"
#include "lawkit/laws.hpp"

namespace lawkit {

enum class LawKind { compute, data, alt1, alt2 };

const char* law_name(LawKind kind);
LawKind law_from_name(const std::string& name);

/// Coefficient symbol names for each law, in the order used by FitReport and
/// SynthSpec coefficient vectors.
const std::vector<std::string>& coefficient_names(LawKind kind);

struct FitReport {
    LawKind law = LawKind::compute;
    std::vector<double> coefficients;  // order matches coefficient_names(law)
    double objective_value = 0.0;
    std::size_t n_points = 0;
    std::vector<double> init_used;
    bool converged = false;
};

LawCoefficients as_compute(const FitReport& report);
DataLawCoefficients as_data(const FitReport& report);
AltLawV1Coefficients as_alt_v1(const FitReport& report);
AltLawV2Coefficients as_alt_v2(const FitReport& report);

/// Packs structured coefficients into the flat law-order vector.
std::vector<double> flatten(const LawCoefficients& c);
std::vector<double> flatten(const DataLawCoefficients& c);
std::vector<double> flatten(const AltLawV1Coefficients& c);
std::vector<double> flatten(const AltLawV2Coefficients& c);

/// Evaluates a law given its flat coefficient vector on one record's
/// (N, U_D, e) triple; the compute law reads D = U_D * e.
double eval_law(LawKind kind, const std::vector<double>& coeffs, double n_params,
                double unique_tokens, double epochs);

struct FitOptions {
    double delta = 1e-3;        // Huber knee on log-loss residuals
    int max_iterations = 2000;  // per descent
    // Starts are ranked by their initial objective; full descents run from the
    // best max_descents of them (every start when the grid is no larger).
    int max_descents = 64;
    std::size_t max_starts = 10000;  // grid cap, strided subsampling beyond
    bool fit_val_loss = false;       // target: train loss (default) or val loss
    unsigned threads = 0;            // 0 = hardware concurrency
};

/// Full Cartesian initialization grid for the law, capped per FitOptions
/// defaults (10,000 starts, stride-subsampled so every axis keeps coverage).
std::vector<std::vector<double>> default_init_grid(LawKind kind,
                                                   std::size_t max_starts = 10000);

/// Thrown when every start fails to produce a finite descent; carries the
/// best partial report found.
struct FitDivergence : std::runtime_error {
    FitReport best;
    explicit FitDivergence(FitReport r)
        : std::runtime_error("fit_law: all grid starts diverged"), best(std::move(r)) {}
};

/// Robust parametric fit: minimizes sum_i Huber_delta(log L_pred(i) -
/// log L_obs(i)) over the law's coefficients, in log-parameterization so all
/// coefficients stay positive (E floored at 1e-12 and reported as 0 there).
/// One quasi-Newton descent per attempted start; the report with the lowest
/// objective wins, ties broken by lexicographic coefficient order.
FitReport fit_law(const std::vector<RunRecord>& records, LawKind kind,
                  const std::vector<std::vector<double>>& init_grid,
                  const FitOptions& options = {});
FitReport fit_law(const std::vector<RunRecord>& records, LawKind kind,
                  const FitOptions& options = {});

/// The fitting objective itself, exposed for tests: coefficients are raw
/// (not log) values in law order.
double fit_objective(const std::vector<RunRecord>& records, LawKind kind,
                     const std::vector<double>& coeffs, double delta,
                     bool fit_val_loss = false);

}  // namespace lawkit
