#pragma once

#include <optional>

namespace lawkit {

/// Compute-constrained loss law L(N, D) = E + A/N^alpha + B/D^beta.
struct LawCoefficients {
    double E = 0.0;
    double A = 0.0;
    double B = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
};

/// Data-constrained law: L(N, U_D, e) = E + A/N^alpha + B/D'^beta with
/// D' = U_D * e^p_e * exp(-((max(0, e-1)/e_p)^gamma)) and
/// e_p = c_p * U_D^m_p / N^k_p.
struct DataLawCoefficients {
    double E = 0.0;
    double A = 0.0;
    double B = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double c_p = 0.0;
    double m_p = 0.0;
    double k_p = 0.0;
    double p_e = 0.0;
    double gamma = 0.0;
};

/// Additive-penalty variant v1: learning loss plus
/// mu * (N/U_D)^delta * log(max(1, e))^gamma_pen, with a saturating
/// D'(e) = U_D * (1 + R_D* * (1 - exp(-max(0, e-1)/R_D*))).
struct AltLawV1Coefficients {
    double E = 0.0;
    double A = 0.0;
    double B = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double delta = 0.0;
    double gamma_pen = 0.0;
    double r_d_star = 0.0;
};

/// Additive-penalty variant v2: same learning loss; penalty
/// mu * (N/D')^delta * softplus((e - kappa*(U_D/N)^eta)/tau)^gamma_pen.
struct AltLawV2Coefficients {
    double E = 0.0;
    double A = 0.0;
    double B = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double mu = 0.0;
    double delta = 0.0;
    double gamma_pen = 0.0;
    double r_d_star = 0.0;
    double kappa = 0.0;
    double eta = 0.0;
    double tau = 0.0;
};

/// Exponential half-life discounting of repeated tokens / excess parameters:
/// D' = U_D * (1 + R_D* * (1 - exp(-R_D/R_D*))), symmetrically for N'.
struct MuennighoffCoefficients {
    double r_d_star = 0.0;
    double r_n_star = 0.0;
    LawCoefficients base;
};

double eval_compute_law(const LawCoefficients& c, double n_params, double tokens);

/// Peak-overfitting epoch e_p = c_p * U_D^m_p / N^k_p.
double peak_epoch(const DataLawCoefficients& c, double n_params, double unique_tokens);

/// Effective dataset size D'. For epochs <= 1 the penalty factor is exactly 1.
double effective_data(const DataLawCoefficients& c, double n_params,
                      double unique_tokens, double epochs);

double eval_data_law(const DataLawCoefficients& c, double n_params,
                     double unique_tokens, double epochs);

double eval_alt_v1(const AltLawV1Coefficients& c, double n_params,
                   double unique_tokens, double epochs);

double eval_alt_v2(const AltLawV2Coefficients& c, double n_params,
                   double unique_tokens, double epochs);

struct EffectivePair {
    double d_eff = 0.0;
    double n_eff = 0.0;
};

/// Effective (D', N') under repetition. R_D = D/U_D - 1 and R_N = N/U_N - 1
/// are computed internally; U_N (the compute-optimal parameter count for
/// U_D under the base law) is derived from the closed-form allocation unless
/// supplied. tokens < unique_tokens is an error.
EffectivePair muennighoff_effective(const MuennighoffCoefficients& c, double n_params,
                                    double tokens, double unique_tokens,
                                    std::optional<double> u_n = std::nullopt);

/// Huber penalty: 0.5*r^2 inside |r| <= delta, delta*(|r| - 0.5*delta) beyond.
double huber(double residual, double delta);

double softplus(double x);

}  // namespace lawkit
