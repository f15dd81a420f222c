#include "lawkit/laws.hpp"

#include <cmath>
#include <stdexcept>

namespace lawkit {

double eval_compute_law(const LawCoefficients& c, double n_params, double tokens) {
    if (!(n_params > 0.0) || !(tokens > 0.0)) {
        throw std::invalid_argument("eval_compute_law: N and D must be positive");
    }
    return c.E + c.A * std::pow(n_params, -c.alpha) + c.B * std::pow(tokens, -c.beta);
}

double peak_epoch(const DataLawCoefficients& c, double n_params, double unique_tokens) {
    return c.c_p * std::pow(unique_tokens, c.m_p) / std::pow(n_params, c.k_p);
}

double effective_data(const DataLawCoefficients& c, double n_params,
                      double unique_tokens, double epochs) {
    if (!(epochs > 0.0)) {
        throw std::invalid_argument("effective_data: epochs must be positive");
    }
    const double grown = unique_tokens * std::pow(epochs, c.p_e);
    if (epochs <= 1.0) return grown;
    const double e_p = peak_epoch(c, n_params, unique_tokens);
    const double penalty = std::exp(-std::pow((epochs - 1.0) / e_p, c.gamma));
    return grown * penalty;
}

double eval_data_law(const DataLawCoefficients& c, double n_params,
                     double unique_tokens, double epochs) {
    if (!(n_params > 0.0) || !(unique_tokens > 0.0)) {
        throw std::invalid_argument("eval_data_law: N and U_D must be positive");
    }
    const double d_eff = effective_data(c, n_params, unique_tokens, epochs);
    return c.E + c.A * std::pow(n_params, -c.alpha) + c.B * std::pow(d_eff, -c.beta);
}

namespace {

// R*(1 - exp(-x/R*)) via expm1 so very large R* degrades gracefully to x.
double saturating_repeats(double x, double r_star) {
    return r_star * (-std::expm1(-x / r_star));
}

double alt_effective_data(double unique_tokens, double epochs, double r_d_star) {
    const double repeats = std::max(0.0, epochs - 1.0);
    return unique_tokens * (1.0 + saturating_repeats(repeats, r_d_star));
}

}  // namespace

double eval_alt_v1(const AltLawV1Coefficients& c, double n_params,
                   double unique_tokens, double epochs) {
    if (!(n_params > 0.0) || !(unique_tokens > 0.0) || !(epochs > 0.0)) {
        throw std::invalid_argument("eval_alt_v1: arguments must be positive");
    }
    const double d_eff = alt_effective_data(unique_tokens, epochs, c.r_d_star);
    const double learning = c.E + c.A * std::pow(n_params, -c.alpha) +
                            c.B * std::pow(d_eff, -c.beta);
    const double log_e = std::log(std::max(1.0, epochs));
    const double penalty =
        c.mu * std::pow(n_params / unique_tokens, c.delta) * std::pow(log_e, c.gamma_pen);
    return learning + penalty;
}

double eval_alt_v2(const AltLawV2Coefficients& c, double n_params,
                   double unique_tokens, double epochs) {
    if (!(n_params > 0.0) || !(unique_tokens > 0.0) || !(epochs > 0.0)) {
        throw std::invalid_argument("eval_alt_v2: arguments must be positive");
    }
    const double d_eff = alt_effective_data(unique_tokens, epochs, c.r_d_star);
    const double learning = c.E + c.A * std::pow(n_params, -c.alpha) +
                            c.B * std::pow(d_eff, -c.beta);
    const double threshold = c.kappa * std::pow(unique_tokens / n_params, c.eta);
    const double sp = softplus((epochs - threshold) / c.tau);
    const double penalty =
        c.mu * std::pow(n_params / d_eff, c.delta) * std::pow(sp, c.gamma_pen);
    return learning + penalty;
}

EffectivePair muennighoff_effective(const MuennighoffCoefficients& c, double n_params,
                                    double tokens, double unique_tokens,
                                    std::optional<double> u_n) {
    if (tokens < unique_tokens) {
        throw std::invalid_argument("muennighoff_effective: tokens < unique_tokens");
    }
    if (!(unique_tokens > 0.0) || !(n_params > 0.0)) {
        throw std::invalid_argument("muennighoff_effective: arguments must be positive");
    }
    const double r_d = tokens / unique_tokens - 1.0;

    double u_n_value;
    if (u_n) {
        u_n_value = *u_n;
    } else {
        // Compute-optimal N for a data budget of U_D tokens, from the base
        // law's closed form: D_opt(C) = G^-1 (C/6)^b inverted for C, then
        // N_opt = G (C/6)^a. Collapses to U_N = G * (U_D * G)^(a/b).
        const auto& b = c.base;
        const double g = std::pow(b.alpha * b.A / (b.beta * b.B), 1.0 / (b.alpha + b.beta));
        const double a_exp = b.beta / (b.alpha + b.beta);
        const double b_exp = b.alpha / (b.alpha + b.beta);
        u_n_value = g * std::pow(unique_tokens * g, a_exp / b_exp);
    }
    const double r_n = n_params / u_n_value - 1.0;

    EffectivePair out;
    out.d_eff = unique_tokens * (1.0 + saturating_repeats(std::max(0.0, r_d), c.r_d_star));
    out.n_eff = u_n_value * (1.0 + saturating_repeats(std::max(0.0, r_n), c.r_n_star));
    return out;
}

double huber(double residual, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("huber: delta must be positive");
    const double a = std::abs(residual);
    if (a <= delta) return 0.5 * residual * residual;
    return delta * (a - 0.5 * delta);
}

double softplus(double x) {
    // log(1 + e^x) without overflow for large |x|
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

}  // namespace lawkit
