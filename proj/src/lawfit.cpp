#include "lawkit/lawfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lawkit/util.hpp"
#include "minimize.hpp"

namespace lawkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEFloor = 1e-12;
constexpr double kLogEFloor = -27.631021115928547;  // ln(1e-12)

std::size_t coefficient_count(LawKind kind) {
    switch (kind) {
        case LawKind::compute: return 5;
        case LawKind::data: return 10;
        case LawKind::alt1: return 9;
        case LawKind::alt2: return 12;
    }
    return 0;
}

// Per-record quantities cached once per fit; every objective evaluation is
// then arithmetic plus a handful of exp/log calls.
struct RecordCache {
    std::vector<double> ln_n, ln_u, ln_e, ln_em1, ln_d_total, log_e_floor1;
    std::vector<double> e, u;
    std::vector<double> log_obs;
    std::size_t size() const { return ln_n.size(); }
};

RecordCache build_cache(const std::vector<RunRecord>& records, bool fit_val_loss) {
    RecordCache c;
    const std::size_t n = records.size();
    c.ln_n.reserve(n);
    c.ln_u.reserve(n);
    c.ln_e.reserve(n);
    c.ln_em1.reserve(n);
    c.ln_d_total.reserve(n);
    c.log_e_floor1.reserve(n);
    c.e.reserve(n);
    c.u.reserve(n);
    c.log_obs.reserve(n);
    for (const auto& r : records) {
        double target = r.final_train_loss;
        if (fit_val_loss) {
            if (!r.final_val_loss) {
                throw std::invalid_argument("fit_law: run '" + r.run_id +
                                            "' has no final_val_loss");
            }
            target = *r.final_val_loss;
        }
        if (!(target > 0.0)) {
            throw std::invalid_argument("fit_law: run '" + r.run_id +
                                        "' has a non-positive loss");
        }
        c.ln_n.push_back(std::log(r.n_params));
        c.ln_u.push_back(std::log(r.unique_tokens));
        c.ln_e.push_back(std::log(r.epochs));
        c.ln_em1.push_back(r.epochs > 1.0 ? std::log(r.epochs - 1.0) : -kInf);
        c.ln_d_total.push_back(std::log(r.total_tokens));
        c.log_e_floor1.push_back(r.epochs > 1.0 ? std::log(r.epochs) : 0.0);
        c.e.push_back(r.epochs);
        c.u.push_back(r.unique_tokens);
        c.log_obs.push_back(std::log(target));
    }
    return c;
}

// coeffs are raw (positive) values in law order.
double predict_ln(LawKind kind, const std::vector<double>& k, const RecordCache& c,
                  std::size_t i) {
    const double e_term = k[0];
    const double ln_a = std::log(k[1]);
    const double alpha = k[2];
    const double ln_b = std::log(k[3]);
    const double beta = k[4];
    const double model_err = std::exp(ln_a - alpha * c.ln_n[i]);

    double pred = 0.0;
    switch (kind) {
        case LawKind::compute: {
            pred = e_term + model_err + std::exp(ln_b - beta * c.ln_d_total[i]);
            break;
        }
        case LawKind::data: {
            const double ln_ep =
                std::log(k[5]) + k[6] * c.ln_u[i] - k[7] * c.ln_n[i];
            const double pen =
                c.e[i] > 1.0 ? std::exp(k[9] * (c.ln_em1[i] - ln_ep)) : 0.0;
            const double ln_deff = c.ln_u[i] + k[8] * c.ln_e[i] - pen;
            pred = e_term + model_err + std::exp(ln_b - beta * ln_deff);
            break;
        }
        case LawKind::alt1: {
            const double repeats = std::max(0.0, c.e[i] - 1.0);
            const double d_eff =
                c.u[i] * (1.0 + k[8] * (-std::expm1(-repeats / k[8])));
            const double pen = k[5] * std::exp(k[6] * (c.ln_n[i] - c.ln_u[i])) *
                               std::pow(c.log_e_floor1[i], k[7]);
            pred = e_term + model_err + std::exp(ln_b - beta * std::log(d_eff)) + pen;
            break;
        }
        case LawKind::alt2: {
            const double repeats = std::max(0.0, c.e[i] - 1.0);
            const double d_eff =
                c.u[i] * (1.0 + k[8] * (-std::expm1(-repeats / k[8])));
            const double ln_deff = std::log(d_eff);
            const double threshold = k[9] * std::exp(k[10] * (c.ln_u[i] - c.ln_n[i]));
            const double sp = softplus((c.e[i] - threshold) / k[11]);
            const double pen = k[5] * std::exp(k[6] * (c.ln_n[i] - ln_deff)) *
                               std::pow(sp, k[7]);
            pred = e_term + model_err + std::exp(ln_b - beta * ln_deff) + pen;
            break;
        }
    }
    return std::log(pred);
}

double objective_on_cache(LawKind kind, const std::vector<double>& coeffs,
                          const RecordCache& cache, double delta) {
    double total = 0.0;
    for (std::size_t i = 0; i < cache.size(); ++i) {
        const double r = predict_ln(kind, coeffs, cache, i) - cache.log_obs[i];
        if (!std::isfinite(r)) return kInf;
        const double a = std::abs(r);
        total += a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
    }
    return total;
}

std::vector<double> decode(const std::vector<double>& theta) {
    std::vector<double> k(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        double t = std::clamp(theta[i], -300.0, 300.0);
        if (i == 0) t = std::max(t, kLogEFloor);  // E may park at the floor
        k[i] = std::exp(t);
    }
    return k;
}

bool sane(LawKind kind, const std::vector<double>& k) {
    for (double v : k) {
        if (!std::isfinite(v)) return false;
    }
    const bool base_ok = k[2] > 0.0 && k[2] <= 2.0 && k[4] > 0.0 && k[4] <= 2.0;
    if (!base_ok) return false;
    if (kind == LawKind::data) {
        return k[5] > 0.0 && k[8] > 0.0 && k[8] <= 4.0 && k[9] > 0.0 && k[9] <= 4.0;
    }
    return true;
}

}  // namespace

const char* law_name(LawKind kind) {
    switch (kind) {
        case LawKind::compute: return "compute";
        case LawKind::data: return "data";
        case LawKind::alt1: return "alt1";
        case LawKind::alt2: return "alt2";
    }
    return "?";
}

LawKind law_from_name(const std::string& name) {
    if (name == "compute") return LawKind::compute;
    if (name == "data") return LawKind::data;
    if (name == "alt1") return LawKind::alt1;
    if (name == "alt2") return LawKind::alt2;
    throw std::invalid_argument("unknown law '" + name +
                                "' (expected compute|data|alt1|alt2)");
}

const std::vector<std::string>& coefficient_names(LawKind kind) {
    static const std::vector<std::string> compute = {"E", "A", "alpha", "B", "beta"};
    static const std::vector<std::string> data = {"E",   "A",   "alpha", "B",   "beta",
                                                  "c_p", "m_p", "k_p",   "p_e", "gamma"};
    static const std::vector<std::string> alt1 = {
        "E", "A", "alpha", "B", "beta", "mu", "delta_pen", "gamma", "r_d_star"};
    static const std::vector<std::string> alt2 = {
        "E",  "A",  "alpha",     "B",     "beta", "mu",
        "delta_pen", "gamma", "r_d_star", "kappa", "eta", "tau"};
    switch (kind) {
        case LawKind::compute: return compute;
        case LawKind::data: return data;
        case LawKind::alt1: return alt1;
        case LawKind::alt2: return alt2;
    }
    return compute;
}

LawCoefficients as_compute(const FitReport& r) {
    return {r.coefficients[0], r.coefficients[1], r.coefficients[3], r.coefficients[2],
            r.coefficients[4]};
}

DataLawCoefficients as_data(const FitReport& r) {
    DataLawCoefficients c;
    c.E = r.coefficients[0];
    c.A = r.coefficients[1];
    c.alpha = r.coefficients[2];
    c.B = r.coefficients[3];
    c.beta = r.coefficients[4];
    c.c_p = r.coefficients[5];
    c.m_p = r.coefficients[6];
    c.k_p = r.coefficients[7];
    c.p_e = r.coefficients[8];
    c.gamma = r.coefficients[9];
    return c;
}

AltLawV1Coefficients as_alt_v1(const FitReport& r) {
    AltLawV1Coefficients c;
    c.E = r.coefficients[0];
    c.A = r.coefficients[1];
    c.alpha = r.coefficients[2];
    c.B = r.coefficients[3];
    c.beta = r.coefficients[4];
    c.mu = r.coefficients[5];
    c.delta = r.coefficients[6];
    c.gamma_pen = r.coefficients[7];
    c.r_d_star = r.coefficients[8];
    return c;
}

AltLawV2Coefficients as_alt_v2(const FitReport& r) {
    AltLawV2Coefficients c;
    c.E = r.coefficients[0];
    c.A = r.coefficients[1];
    c.alpha = r.coefficients[2];
    c.B = r.coefficients[3];
    c.beta = r.coefficients[4];
    c.mu = r.coefficients[5];
    c.delta = r.coefficients[6];
    c.gamma_pen = r.coefficients[7];
    c.r_d_star = r.coefficients[8];
    c.kappa = r.coefficients[9];
    c.eta = r.coefficients[10];
    c.tau = r.coefficients[11];
    return c;
}

std::vector<double> flatten(const LawCoefficients& c) {
    return {c.E, c.A, c.alpha, c.B, c.beta};
}

std::vector<double> flatten(const DataLawCoefficients& c) {
    return {c.E, c.A, c.alpha, c.B, c.beta, c.c_p, c.m_p, c.k_p, c.p_e, c.gamma};
}

std::vector<double> flatten(const AltLawV1Coefficients& c) {
    return {c.E, c.A, c.alpha, c.B, c.beta, c.mu, c.delta, c.gamma_pen, c.r_d_star};
}

std::vector<double> flatten(const AltLawV2Coefficients& c) {
    return {c.E,  c.A,     c.alpha,    c.B,     c.beta, c.mu,
            c.delta, c.gamma_pen, c.r_d_star, c.kappa, c.eta,  c.tau};
}

double eval_law(LawKind kind, const std::vector<double>& coeffs, double n_params,
                double unique_tokens, double epochs) {
    if (coeffs.size() != coefficient_count(kind)) {
        throw std::invalid_argument("eval_law: wrong coefficient count");
    }
    switch (kind) {
        case LawKind::compute: {
            LawCoefficients c{coeffs[0], coeffs[1], coeffs[3], coeffs[2], coeffs[4]};
            return eval_compute_law(c, n_params, unique_tokens * epochs);
        }
        case LawKind::data: {
            FitReport r;
            r.coefficients = coeffs;
            return eval_data_law(as_data(r), n_params, unique_tokens, epochs);
        }
        case LawKind::alt1: {
            FitReport r;
            r.coefficients = coeffs;
            return eval_alt_v1(as_alt_v1(r), n_params, unique_tokens, epochs);
        }
        case LawKind::alt2: {
            FitReport r;
            r.coefficients = coeffs;
            return eval_alt_v2(as_alt_v2(r), n_params, unique_tokens, epochs);
        }
    }
    throw std::logic_error("eval_law: bad kind");
}

std::vector<std::vector<double>> default_init_grid(LawKind kind, std::size_t max_starts) {
    if (max_starts == 0) throw std::invalid_argument("default_init_grid: max_starts == 0");
    const std::vector<double> e_init = {0.5, 1.5, 2.5};
    const std::vector<double> ab_init = {1e1, 1e3, 1e5};
    const std::vector<double> exp_init = {0.2, 0.4, 0.7};

    std::vector<std::vector<double>> axes = {e_init, ab_init, exp_init, ab_init, exp_init};
    switch (kind) {
        case LawKind::compute:
            break;
        case LawKind::data:
            axes.push_back({10.0, 100.0, 1000.0});  // c_p
            axes.push_back({0.3, 0.6});             // m_p
            axes.push_back({0.3, 0.6});             // k_p
            axes.push_back({1.0, 1.5});             // p_e
            axes.push_back({0.3, 0.6});             // gamma
            break;
        case LawKind::alt1:
            axes.push_back({1e-4, 1e-2, 1.0});  // mu
            axes.push_back({0.3, 0.6});         // delta
            axes.push_back({0.5, 1.5, 4.0});    // gamma_pen
            axes.push_back({10.0, 100.0});      // r_d_star
            break;
        case LawKind::alt2:
            axes.push_back({1e-4, 1e-2, 1.0});  // mu
            axes.push_back({0.3, 0.6});         // delta
            axes.push_back({0.5, 1.5});         // gamma_pen
            axes.push_back({10.0, 100.0});      // r_d_star
            axes.push_back({1e3, 1e4});         // kappa
            axes.push_back({1.0, 1.5});         // eta
            axes.push_back({10.0, 30.0});       // tau
            break;
    }

    std::size_t total = 1;
    for (const auto& a : axes) total *= a.size();

    auto point_at = [&](std::size_t index) {
        std::vector<double> p(axes.size());
        for (std::size_t d = axes.size(); d-- > 0;) {
            const auto& a = axes[d];
            p[d] = a[index % a.size()];
            index /= a.size();
        }
        return p;
    };

    std::vector<std::vector<double>> grid;
    if (total <= max_starts) {
        grid.reserve(total);
        for (std::size_t i = 0; i < total; ++i) grid.push_back(point_at(i));
    } else {
        // strided subsample: lexicographic index walks every axis cyclically,
        // so a fixed stride keeps coverage of each coefficient's values
        const std::size_t stride = (total + max_starts - 1) / max_starts;
        grid.reserve(max_starts);
        for (std::size_t i = 0; i < total && grid.size() < max_starts; i += stride) {
            grid.push_back(point_at(i));
        }
    }
    return grid;
}

double fit_objective(const std::vector<RunRecord>& records, LawKind kind,
                     const std::vector<double>& coeffs, double delta,
                     bool fit_val_loss) {
    if (coeffs.size() != coefficient_count(kind)) {
        throw std::invalid_argument("fit_objective: wrong coefficient count");
    }
    const RecordCache cache = build_cache(records, fit_val_loss);
    return objective_on_cache(kind, coeffs, cache, delta);
}

FitReport fit_law(const std::vector<RunRecord>& records, LawKind kind,
                  const std::vector<std::vector<double>>& init_grid,
                  const FitOptions& options) {
    const std::size_t dim = coefficient_count(kind);
    if (records.size() < dim) {
        throw std::invalid_argument("fit_law: need at least as many records as coefficients");
    }
    if (init_grid.empty()) throw std::invalid_argument("fit_law: empty init grid");
    for (const auto& start : init_grid) {
        if (start.size() != dim) {
            throw std::invalid_argument("fit_law: init point has wrong dimension");
        }
        for (double v : start) {
            if (!(v > 0.0)) throw std::invalid_argument("fit_law: init values must be positive");
        }
    }

    const RecordCache cache = build_cache(records, options.fit_val_loss);
    const double delta = options.delta;

    auto theta_objective = [&](const std::vector<double>& theta) {
        return objective_on_cache(kind, decode(theta), cache, delta);
    };

    // Rank every start by its initial objective.
    std::vector<std::vector<double>> thetas(init_grid.size());
    std::vector<double> start_vals(init_grid.size());
    parallel_for(
        init_grid.size(),
        [&](std::size_t i) {
            thetas[i].resize(dim);
            for (std::size_t d = 0; d < dim; ++d) thetas[i][d] = std::log(init_grid[i][d]);
            start_vals[i] = theta_objective(thetas[i]);
        },
        options.threads);

    std::vector<std::size_t> order(init_grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return start_vals[a] < start_vals[b];
    });

    const std::size_t n_descents =
        std::min<std::size_t>(order.size(), std::max(1, options.max_descents));

    struct DescentOutcome {
        double fx = kInf;
        std::vector<double> coeffs;
        bool converged = false;
        std::size_t start_index = 0;
    };
    std::vector<DescentOutcome> outcomes(n_descents);

    detail::MinimizeOptions mopts;
    mopts.max_iterations = options.max_iterations;

    parallel_for(
        n_descents,
        [&](std::size_t rank) {
            const std::size_t idx = order[rank];
            auto result = detail::bfgs_minimize(theta_objective, thetas[idx], mopts);
            DescentOutcome& out = outcomes[rank];
            out.start_index = idx;
            if (std::isfinite(result.fx)) {
                out.fx = result.fx;
                out.coeffs = decode(result.x);
                out.converged = result.converged;
            }
        },
        options.threads);

    // Deterministic reduction: lowest objective, ties by coefficient order.
    const DescentOutcome* best = nullptr;
    for (const auto& o : outcomes) {
        if (o.coeffs.empty()) continue;
        if (!best || o.fx < best->fx ||
            (o.fx == best->fx && o.coeffs < best->coeffs)) {
            best = &o;
        }
    }

    if (!best) {
        FitReport partial;
        partial.law = kind;
        partial.coefficients = init_grid[order[0]];
        partial.objective_value = start_vals[order[0]];
        partial.n_points = records.size();
        partial.init_used = init_grid[order[0]];
        partial.converged = false;
        throw FitDivergence(std::move(partial));
    }

    FitReport report;
    report.law = kind;
    report.coefficients = best->coeffs;
    if (report.coefficients[0] <= kEFloor) report.coefficients[0] = 0.0;
    report.n_points = records.size();
    report.init_used = init_grid[best->start_index];
    report.converged = best->converged && sane(kind, best->coeffs);
    // Recompute on the reported (floored) coefficients so the stored value is
    // exactly what these coefficients attain.
    report.objective_value = fit_objective(records, kind, report.coefficients, delta,
                                           options.fit_val_loss);
    return report;
}

FitReport fit_law(const std::vector<RunRecord>& records, LawKind kind,
                  const FitOptions& options) {
    return fit_law(records, kind, default_init_grid(kind, options.max_starts), options);
}

}  // namespace lawkit
