#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "lawkit/builtin.hpp"
#include "lawkit/lawfit.hpp"
#include "lawkit/oracle.hpp"

using namespace lawkit;

namespace {

std::vector<RunRecord> compute_law_records(double sigma, std::uint64_t seed, int n_count,
                                           int d_count) {
    SynthSpec spec;
    spec.law = LawKind::compute;
    spec.coefficients = flatten(*builtin_coefficients("paper-compute").compute);
    spec.n_grid = {1e7, 1e10, n_count};
    spec.d_grid = {1e9, 1e12, d_count};
    spec.sigma = sigma;
    spec.seed = seed;
    return synth_runs(spec);
}

}  // namespace

TEST_CASE("objective is zero at the generating coefficients") {
    const auto truth = flatten(*builtin_coefficients("paper-compute").compute);
    const auto records = compute_law_records(0.0, 1, 8, 8);
    CHECK(fit_objective(records, LawKind::compute, truth, 1e-3) < 1e-20);
}

TEST_CASE("objective agrees with the public law evaluators") {
    SynthSpec spec;
    spec.law = LawKind::data;
    spec.coefficients = flatten(*builtin_coefficients("paper-data").data);
    spec.n_grid = {1e8, 1e10, 4};
    spec.u_grid = {1e9, 1e11, 4};
    spec.e_grid = {1.0, 300.0, 5};
    spec.sigma = 0.1;
    spec.seed = 9;
    const auto records = synth_runs(spec);

    const std::vector<double> probe = {0.3, 900.0, 0.5, 40.0, 0.2,
                                       100.0, 0.4, 0.5, 1.2, 0.5};
    double expected = 0.0;
    for (const auto& r : records) {
        const double pred =
            eval_law(LawKind::data, probe, r.n_params, r.unique_tokens, r.epochs);
        expected += huber(std::log(pred) - std::log(r.final_train_loss), 1e-3);
    }
    const double got = fit_objective(records, LawKind::data, probe, 1e-3);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("objective is permutation-invariant") {
    auto records = compute_law_records(0.05, 7, 6, 6);
    const std::vector<double> probe = {1.0, 500.0, 0.35, 3000.0, 0.35};
    const double before = fit_objective(records, LawKind::compute, probe, 1e-3);
    std::mt19937_64 rng(3);
    std::shuffle(records.begin(), records.end(), rng);
    const double after = fit_objective(records, LawKind::compute, probe, 1e-3);
    CHECK(after == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("noiseless recovery of the compute law from 50 records") {
    const auto truth = *builtin_coefficients("paper-compute").compute;
    const auto records = compute_law_records(0.0, 4, 5, 10);
    REQUIRE(records.size() == 50);

    FitOptions options;
    options.max_descents = 48;
    const auto report = fit_law(records, LawKind::compute, options);
    const auto fitted = as_compute(report);
    CHECK(report.converged);
    CHECK(std::abs(fitted.alpha - truth.alpha) < 1e-3);
    CHECK(std::abs(fitted.beta - truth.beta) < 1e-3);
    CHECK(std::abs(fitted.E / truth.E - 1.0) < 0.01);
    CHECK(std::abs(fitted.A / truth.A - 1.0) < 0.01);
    CHECK(std::abs(fitted.B / truth.B - 1.0) < 0.01);
    CHECK(report.objective_value < 1e-8);
}

TEST_CASE("compute fit on one-epoch data matches the data-law reduction") {
    // data-law records at e = 1 are compute-law records with D = U_D
    SynthSpec spec;
    spec.law = LawKind::data;
    spec.coefficients = flatten(*builtin_coefficients("paper-data").data);
    spec.n_grid = {1e8, 1e10, 5};
    spec.u_grid = {1e9, 1e12, 6};
    spec.e_grid = {1.0, 1.0, 1};
    spec.sigma = 0.0;
    spec.seed = 2;
    const auto records = synth_runs(spec);

    // identity at matched coefficient vectors, for any extras
    const auto d = *builtin_coefficients("paper-data").data;
    const std::vector<double> as_compute_vec = {d.E, d.A, d.alpha, d.B, d.beta};
    const std::vector<double> as_data_vec = {d.E, d.A, d.alpha, d.B, d.beta,
                                             7.0, 0.9, 0.1, 2.2, 1.3};
    const double o_compute = fit_objective(records, LawKind::compute, as_compute_vec, 1e-3);
    const double o_data = fit_objective(records, LawKind::data, as_data_vec, 1e-3);
    CHECK(o_compute == doctest::Approx(o_data).epsilon(1e-12));
    CHECK(o_compute < 1e-20);
}

TEST_CASE("noiseless recovery of the additive-penalty laws") {
    SynthSpec spec;
    spec.n_grid = {1e7, 1e10, 6};
    spec.u_grid = {1e8, 1e11, 6};
    spec.e_grid = {1.0, 3000.0, 10};

    spec.law = LawKind::alt1;
    spec.coefficients = {0.5, 800.0, 0.4, 50.0, 0.15, 0.01, 0.4, 2.0, 50.0};
    auto report = fit_law(synth_runs(spec), LawKind::alt1, FitOptions{});
    CHECK(report.converged);
    CHECK(report.objective_value < 1e-10);
    for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
        CHECK(report.coefficients[i] ==
              doctest::Approx(spec.coefficients[i]).epsilon(1e-2));
    }

    spec.law = LawKind::alt2;
    spec.coefficients = {0.5, 800.0, 0.4, 50.0, 0.15, 0.05, 0.3, 0.8, 40.0, 5e3, 1.2, 20.0};
    report = fit_law(synth_runs(spec), LawKind::alt2, FitOptions{});
    CHECK(report.converged);
    CHECK(report.objective_value < 1e-10);
    for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
        CHECK(report.coefficients[i] ==
              doctest::Approx(spec.coefficients[i]).epsilon(1e-2));
    }
}

TEST_CASE("default grids respect the start cap") {
    CHECK(default_init_grid(LawKind::compute).size() == 243);
    const auto data_grid = default_init_grid(LawKind::data);
    CHECK(data_grid.size() <= 10000);
    CHECK(data_grid.size() >= 1000);
    for (const auto& start : data_grid) {
        REQUIRE(start.size() == 10);
        for (double v : start) CHECK(v > 0.0);
    }
    CHECK(default_init_grid(LawKind::alt2).size() <= 10000);
}

TEST_CASE("fit_law validates its inputs") {
    const auto records = compute_law_records(0.0, 1, 2, 2);
    CHECK_THROWS_AS(fit_law({records[0], records[1]}, LawKind::compute, FitOptions{}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        fit_law(records, LawKind::compute, std::vector<std::vector<double>>{}, FitOptions{}),
        std::invalid_argument);
    CHECK_THROWS_AS(fit_law(records, LawKind::compute,
                            std::vector<std::vector<double>>{{1.0, 2.0}}, FitOptions{}),
                    std::invalid_argument);
}

TEST_CASE("iteration-starved fits are reported unconverged") {
    const auto records = compute_law_records(0.02, 11, 5, 5);
    FitOptions options;
    options.max_iterations = 1;
    options.max_descents = 2;
    const auto report = fit_law(records, LawKind::compute, options);
    CHECK(!report.converged);
}

TEST_CASE("fit target can be the validation loss") {
    auto records = compute_law_records(0.0, 8, 4, 4);
    for (auto& r : records) {
        r.final_val_loss = r.final_train_loss * 1.5;  // distinct target
    }
    const std::vector<double> truth = flatten(*builtin_coefficients("paper-compute").compute);
    const double on_train = fit_objective(records, LawKind::compute, truth, 1e-3, false);
    const double on_val = fit_objective(records, LawKind::compute, truth, 1e-3, true);
    CHECK(on_train < 1e-20);
    // every residual is log 1.5, out in the linear Huber region
    const double expected = records.size() * 1e-3 * (std::log(1.5) - 0.5e-3);
    CHECK(on_val == doctest::Approx(expected).epsilon(1e-9));

    records[0].final_val_loss.reset();
    CHECK_THROWS_AS(fit_objective(records, LawKind::compute, truth, 1e-3, true),
                    std::invalid_argument);
}

TEST_CASE("fit result does not depend on worker count") {
    const auto records = compute_law_records(0.02, 5, 6, 8);
    FitOptions one;
    one.threads = 1;
    one.max_descents = 12;
    FitOptions two = one;
    two.threads = 2;
    const auto a = fit_law(records, LawKind::compute, one);
    const auto b = fit_law(records, LawKind::compute, two);
    REQUIRE(a.coefficients.size() == b.coefficients.size());
    for (std::size_t i = 0; i < a.coefficients.size(); ++i) {
        CHECK(a.coefficients[i] == b.coefficients[i]);
    }
    CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("report carries names matching the law" ) {
    using Names = std::vector<std::string>;
    CHECK(coefficient_names(LawKind::compute) ==
          Names{"E", "A", "alpha", "B", "beta"});
    CHECK(coefficient_names(LawKind::data) ==
          Names{"E", "A", "alpha", "B", "beta", "c_p", "m_p", "k_p", "p_e", "gamma"});
    CHECK(coefficient_names(LawKind::alt1) ==
          Names{"E", "A", "alpha", "B", "beta", "mu", "delta_pen", "gamma", "r_d_star"});
    CHECK(coefficient_names(LawKind::alt2) ==
          Names{"E", "A", "alpha", "B", "beta", "mu", "delta_pen", "gamma", "r_d_star",
                "kappa", "eta", "tau"});
    CHECK(law_from_name("alt1") == LawKind::alt1);
    CHECK_THROWS_AS(law_from_name("quadratic"), std::invalid_argument);
}
