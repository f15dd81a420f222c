#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lawkit/diffusion.hpp"
#include "lawkit/util.hpp"

using namespace lawkit;

namespace {

const Schedule kSchedules[] = {Schedule::linear(), Schedule::poly2(), Schedule::cosine()};

std::vector<TokenSeq> repeated(const TokenSeq& seq, int copies) {
    return std::vector<TokenSeq>(copies, seq);
}

}  // namespace

TEST_CASE("schedule point values") {
    CHECK(Schedule::linear().alpha(0.3) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(Schedule::poly2().alpha(0.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(Schedule::cosine().alpha(0.0) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(Schedule::linear().weight(0.5) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(Schedule::linear().weight(0.01) == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(Schedule::poly2().weight(0.5) == doctest::Approx(4.0).epsilon(1e-12));

    CHECK_THROWS_AS(Schedule::linear().alpha(-0.1), std::domain_error);
    CHECK_THROWS_AS(Schedule::linear().alpha(1.1), std::domain_error);
    CHECK_THROWS_AS(Schedule::linear().weight(0.0), std::domain_error);
}

TEST_CASE("schedule invariants on a dense grid") {
    for (const auto& s : kSchedules) {
        CHECK(std::abs(s.alpha(0.0) - 1.0) < 1e-9);
        CHECK(std::abs(s.alpha(1.0)) < 1e-9);
        double prev = s.alpha(0.0);
        for (int i = 1; i <= 1000; ++i) {
            const double a = s.alpha(i / 1000.0);
            CHECK(a < prev);
            prev = a;
        }
        // finite differences reproduce the analytic derivative
        const double h = 1e-6;
        for (double t = 0.01; t < 0.995; t += 0.0097) {
            const double fd = (s.alpha(t + h) - s.alpha(t - h)) / (2.0 * h);
            CHECK(std::abs(fd - s.alpha_prime(t)) < 1e-6);
        }
        for (double t = 1e-3; t < 1.0; t += 0.0131) {
            CHECK(s.weight(t) > 0.0);
        }
    }
}

TEST_CASE("custom schedule interpolates its table") {
    const auto s = Schedule::custom({{0.0, 1.0}, {0.4, 0.7}, {1.0, 0.0}});
    CHECK(s.alpha(0.2) == doctest::Approx(0.85).epsilon(1e-12));
    CHECK(s.alpha_prime(0.2) == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(s.alpha_prime(0.7) == doctest::Approx(-0.7 / 0.6).epsilon(1e-12));
    CHECK(s.weight(0.5) > 0.0);

    CHECK_THROWS_AS(Schedule::custom({{0.0, 1.0}, {0.5, 1.1}, {1.0, 0.0}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(Schedule::custom({{0.0, 0.9}, {1.0, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Schedule::custom({{0.1, 1.0}, {1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("forward_corrupt endpoints") {
    const auto batch = repeated({0, 1, 2, 3, 2, 1}, 4);
    const auto clean = forward_corrupt(batch, 0.0, Schedule::linear(), Kernel::masked, 4, 4, 9);
    CHECK(clean.corrupted == batch);

    const auto full = forward_corrupt(batch, 1.0, Schedule::linear(), Kernel::masked, 4, 4, 9);
    for (const auto& seq : full.corrupted) {
        for (int tok : seq) CHECK(tok == 4);
    }

    CHECK_THROWS_WITH_AS(
        forward_corrupt({{0, 4}}, 0.5, Schedule::linear(), Kernel::masked, 4, 4, 9),
        doctest::Contains("collides"), std::invalid_argument);
    CHECK_THROWS_AS(forward_corrupt({{0}}, 0.5, Schedule::linear(), Kernel::uniform, 1, 1, 9),
                    std::invalid_argument);
}

TEST_CASE("forward_corrupt masked fraction concentrates at 1 - alpha(t)") {
    const auto batch = repeated(TokenSeq(1000, 1), 100);  // 1e5 positions
    for (const auto& s : kSchedules) {
        for (double t : {0.1, 0.25, 0.5, 0.9}) {
            const auto cb = forward_corrupt(batch, t, s, Kernel::masked, 2, 2, 31);
            long masked = 0;
            for (const auto& seq : cb.corrupted) {
                masked += std::count(seq.begin(), seq.end(), 2);
            }
            const double p = 1.0 - s.alpha(t);
            const double sigma = std::sqrt(p * (1.0 - p) * 1e5);
            CHECK(std::abs(masked - p * 1e5) <= 4.0 * sigma + 1.0);
        }
    }
}

TEST_CASE("forward_corrupt is deterministic and supports per-sequence noise") {
    const auto batch = repeated({0, 1, 2}, 8);
    const auto a = forward_corrupt(batch, 0.5, Schedule::linear(), Kernel::masked, 3, 3, 77);
    const auto b = forward_corrupt(batch, 0.5, Schedule::linear(), Kernel::masked, 3, 3, 77);
    CHECK(a.corrupted == b.corrupted);

    const auto mixed = forward_corrupt(batch, std::vector<double>{0.0, 1.0, 0.0, 1.0, 0.0,
                                                                  1.0, 0.0, 1.0},
                                       Schedule::linear(), Kernel::masked, 3, 3, 77);
    for (std::size_t i = 0; i < mixed.corrupted.size(); ++i) {
        if (i % 2 == 0) {
            CHECK(mixed.corrupted[i] == batch[i]);
        } else {
            for (int tok : mixed.corrupted[i]) CHECK(tok == 3);
        }
    }
    CHECK_THROWS_AS(forward_corrupt(batch, std::vector<double>{0.5}, Schedule::linear(),
                                    Kernel::masked, 3, 3, 77),
                    std::invalid_argument);
}

TEST_CASE("uniform kernel marks latent corruption even on coincidences") {
    const auto batch = repeated(TokenSeq(64, 0), 64);
    const auto cb = forward_corrupt(batch, 0.7, Schedule::linear(), Kernel::uniform, 2, -1, 5);
    long altered = 0, changed = 0;
    for (std::size_t s = 0; s < cb.corrupted.size(); ++s) {
        for (std::size_t i = 0; i < cb.corrupted[s].size(); ++i) {
            altered += cb.altered[s][i];
            changed += cb.corrupted[s][i] != cb.original[s][i];
        }
    }
    CHECK(altered > changed);  // roughly half the redraws land on the original
    CHECK(changed > 0);
}

TEST_CASE("rate matrix entries match the printed kernels") {
    CHECK(rate_matrix_entry(Kernel::uniform, 1, 1, 3) == -2.0);
    CHECK(rate_matrix_entry(Kernel::uniform, 0, 2, 3) == 1.0);
    CHECK(rate_matrix_entry(Kernel::masked, 0, 0, 5) == -1.0);
    CHECK(rate_matrix_entry(Kernel::masked, 4, 1, 5) == 1.0);
    CHECK(rate_matrix_entry(Kernel::masked, 4, 4, 5) == 0.0);
    CHECK(rate_matrix_entry(Kernel::masked, 1, 3, 5) == 0.0);
    CHECK_THROWS_AS(rate_matrix_entry(Kernel::masked, 5, 0, 5), std::out_of_range);

    for (int k = 2; k <= 64; ++k) {
        for (int i = 0; i < k; ++i) {
            double row = 0.0;
            for (int j = 0; j < k; ++j) row += rate_matrix_entry(Kernel::uniform, i, j, k);
            CHECK(std::abs(row) < 1e-12);
        }
        // absorbing kernel: non-mask columns sum to zero
        for (int j = 0; j < k - 1; ++j) {
            double col = 0.0;
            for (int i = 0; i < k; ++i) col += rate_matrix_entry(Kernel::masked, i, j, k);
            CHECK(std::abs(col) < 1e-12);
        }
    }
}

TEST_CASE("reverse_transition endpoints and arithmetic") {
    const std::vector<double> uniform4(4, 0.25);
    const auto full = reverse_transition(Schedule::linear(), 0.8, 0.0, std::nullopt, uniform4);
    CHECK(full.mask_prob == doctest::Approx(0.0).epsilon(1e-12));

    const auto fixed = reverse_transition(Schedule::linear(), 0.8, 0.4, 2, uniform4);
    CHECK(fixed.token_probs[2] == 1.0);
    CHECK(fixed.mask_prob == 0.0);

    const auto step = reverse_transition(Schedule::linear(), 0.8, 0.4, std::nullopt, uniform4);
    CHECK(step.mask_prob == doctest::Approx(0.5).epsilon(1e-12));
    for (double p : step.token_probs) CHECK(p == doctest::Approx(0.125).epsilon(1e-12));

    CHECK_THROWS_AS(reverse_transition(Schedule::linear(), 0.4, 0.8, std::nullopt, uniform4),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        reverse_transition(Schedule::linear(), 0.8, 0.4, std::nullopt, {0.5, 0.7}),
        std::invalid_argument);
}

TEST_CASE("reverse_transition is a distribution across schedules and times") {
    const std::vector<double> dist = {0.1, 0.2, 0.3, 0.4};
    for (const auto& s : kSchedules) {
        for (double t = 0.05; t <= 1.0; t += 0.05) {
            for (double s_next = 0.0; s_next < t - 1e-9; s_next += 0.05) {
                const auto out = reverse_transition(s, t, s_next, std::nullopt, dist);
                double total = out.mask_prob;
                CHECK(out.mask_prob >= 0.0);
                for (double p : out.token_probs) {
                    CHECK(p >= 0.0);
                    total += p;
                }
                CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("elbo of a perfect predictor is zero for every schedule") {
    const TokenSeq seq = {0, 1, 2, 1};
    const ExactPosteriorPredictor perfect({{seq, 1.0}}, 3, 3);
    for (const auto& s : kSchedules) {
        const auto est = elbo_loss(repeated(seq, 4), perfect, s, 200, 13, 3);
        CHECK(est.value == 0.0);
        CHECK(est.clamp_count == 0);
    }
}

TEST_CASE("elbo of an indifferent predictor integrates to log 2") {
    const auto batch = repeated(TokenSeq{1}, 64);
    const UniformPredictor coin(2);
    // the reweighting cancels the masked fraction for any schedule
    for (const auto& s : kSchedules) {
        const auto est = elbo_loss(batch, coin, s, 10000, 99, 2);
        CHECK(std::abs(est.value - std::numbers::ln2) <= 3.0 * est.std_error + 2e-3);
    }
}

TEST_CASE("maskgit loss is the plain masked cross entropy") {
    const auto batch = repeated(TokenSeq{1}, 16);
    const UniformPredictor coin(2);
    const auto est = maskgit_loss(batch, coin, Schedule::linear(), 500, 7, 2);
    CHECK(est.value == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
    CHECK(est.std_error < 1e-12);  // every masked position contributes exactly ln 2

    const ExactPosteriorPredictor perfect({{TokenSeq{1}, 1.0}}, 2, 2);
    CHECK(maskgit_loss(batch, perfect, Schedule::linear(), 200, 7, 2).value == 0.0);
}

TEST_CASE("elbo estimate is deterministic given the seed") {
    const auto batch = repeated(TokenSeq{0, 1}, 8);
    const UniformPredictor coin(2);
    const auto a = elbo_loss(batch, coin, Schedule::poly2(), 500, 21, 2);
    const auto b = elbo_loss(batch, coin, Schedule::poly2(), 500, 21, 2);
    CHECK(a.value == b.value);
    const auto c = elbo_loss(batch, coin, Schedule::poly2(), 500, 22, 2);
    CHECK(a.value != c.value);
}

TEST_CASE("uniform kernel scoring splits clean and noisy streams") {
    const auto batch = repeated(TokenSeq{1, 0, 1, 1}, 32);
    const UniformPredictor coin(2);

    // t = 0: nothing corrupted, clean stream is the plain NLL
    const auto at_zero = uniform_kernel_loss(batch, coin, Schedule::linear(), 50, 3, 2,
                                             1e-3, 0.0);
    CHECK(at_zero.noisy.value == 0.0);
    CHECK(at_zero.clean.value == doctest::Approx(std::numbers::ln2).epsilon(1e-12));

    // copy predictor: clean positions are free, corrupted ones get floored
    const CopyPredictor copier(2);
    const auto copied = uniform_kernel_loss(batch, copier, Schedule::linear(), 200, 3, 2);
    CHECK(copied.clean.value == 0.0);
    CHECK(copied.noisy.value > 0.0);

    // per-sequence averaging changes the weighting, not the sign
    const auto per_seq =
        uniform_kernel_loss(batch, coin, Schedule::linear(), 200, 3, 2, 1e-3, std::nullopt,
                            CleanAveraging::per_sequence);
    CHECK(per_seq.clean.value == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
}

TEST_CASE("uniform-kernel posterior scores clean context below noisy") {
    // i.i.d. source over {0, 1} with a 0.7/0.3 marginal
    const std::vector<double> marginal = {0.7, 0.3};
    std::vector<TokenSeq> batch;
    std::mt19937_64 rng(41);
    std::discrete_distribution<int> draw({0.7, 0.3});
    for (int i = 0; i < 256; ++i) batch.push_back({draw(rng), draw(rng)});

    for (double t : {0.2, 0.5, 0.8}) {
        const double keep = Schedule::linear().alpha(t);
        const IndependentUniformPosteriorPredictor bayes(marginal, keep);
        const auto est = uniform_kernel_loss(batch, bayes, Schedule::linear(), 2000, 11, 2,
                                             1e-3, t);

        // exact per-position enumeration of both streams
        auto posterior = [&](int v, int c) {
            double num = marginal[v] * (keep * (v == c ? 1.0 : 0.0) + (1.0 - keep) / 2.0);
            double den = 0.0;
            for (int w = 0; w < 2; ++w) {
                den += marginal[w] * (keep * (w == c ? 1.0 : 0.0) + (1.0 - keep) / 2.0);
            }
            return num / den;
        };
        double clean_exact = 0.0, noisy_exact = 0.0;
        for (int v = 0; v < 2; ++v) {
            clean_exact += marginal[v] * -std::log(posterior(v, v));
            for (int c = 0; c < 2; ++c) {
                noisy_exact += marginal[v] * 0.5 * -std::log(posterior(v, c));
            }
        }
        CHECK(est.clean.value < est.noisy.value);
        CHECK(std::abs(est.clean.value - clean_exact) <= 4.0 * est.clean.std_error + 2e-2);
        // linear schedule at fixed t: weight * altered fraction = 1 in expectation
        CHECK(std::abs(est.noisy.value - noisy_exact) <= 4.0 * est.noisy.std_error + 2e-2);
    }
}

TEST_CASE("elbo with the exact posterior meets the entropy of the source") {
    // correlated length-2 source over three tokens
    const std::vector<std::pair<TokenSeq, double>> source = {
        {{0, 1}, 0.4}, {{1, 2}, 0.3}, {{2, 0}, 0.2}, {{0, 0}, 0.1}};
    const double entropy_per_token = 1.2798542258336674 / 2.0;

    std::vector<TokenSeq> batch;
    std::mt19937_64 rng(4242);
    std::discrete_distribution<int> draw({0.4, 0.3, 0.2, 0.1});
    for (int i = 0; i < 128; ++i) batch.push_back(source[draw(rng)].first);

    const ExactPosteriorPredictor posterior(source, 3, 3);
    for (const auto& s : kSchedules) {
        const auto est = elbo_loss(batch, posterior, s, 4000, 17, 3);
        CHECK(est.value >= entropy_per_token - 3.0 * est.std_error);
        // the bound is tight for the exact posterior; sanity band both ways
        CHECK(std::abs(est.value - entropy_per_token) <= 5.0 * est.std_error + 0.02);
    }
}

TEST_CASE("entropy bound also holds on a length-3 source") {
    const std::vector<std::pair<TokenSeq, double>> source = {
        {{0, 1, 2}, 0.35}, {{1, 1, 0}, 0.25}, {{2, 0, 3}, 0.25}, {{3, 2, 1}, 0.15}};
    double entropy = 0.0;
    for (const auto& [seq, p] : source) entropy -= p * std::log(p);
    const double per_token = entropy / 3.0;

    std::vector<TokenSeq> batch;
    std::mt19937_64 rng(515);
    std::discrete_distribution<int> draw({0.35, 0.25, 0.25, 0.15});
    for (int i = 0; i < 96; ++i) batch.push_back(source[draw(rng)].first);

    const ExactPosteriorPredictor posterior(source, 4, 4);
    const auto est = elbo_loss(batch, posterior, Schedule::linear(), 4000, 61, 4);
    CHECK(est.value >= per_token - 3.0 * est.std_error);
    CHECK(std::abs(est.value - per_token) <= 5.0 * est.std_error + 0.02);
}

TEST_CASE("reverse composition reproduces the forward marginal") {
    // corrupt to t, step back to s with the exact posterior: the state law at
    // s must equal the forward marginal (masked w.p. 1 - alpha(s), token v
    // w.p. alpha(s) p(v)) for a context-free source
    const std::vector<double> p = {0.7, 0.3};
    const double t = 0.8, s = 0.3;
    const auto schedule = Schedule::linear();
    const double alpha_s = schedule.alpha(s);

    std::mt19937_64 rng(2718);
    std::discrete_distribution<int> source({p[0], p[1]});
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const int trials = 100000;
    long masked = 0;
    long tokens[2] = {0, 0};
    for (int i = 0; i < trials; ++i) {
        const int x0 = source(rng);
        const auto cb = forward_corrupt({{x0}}, t, schedule, Kernel::masked, 2, 2,
                                        derive_seed(99, i));
        const bool is_masked = cb.corrupted[0][0] == 2;
        const auto dist = reverse_transition(schedule, t, s,
                                             is_masked ? std::nullopt
                                                       : std::optional<int>(x0),
                                             p);
        // sample the reverse step
        const double u = unit(rng);
        if (is_masked && u < dist.mask_prob) {
            ++masked;
        } else {
            double acc = is_masked ? dist.mask_prob : 0.0;
            for (int v = 0; v < 2; ++v) {
                acc += dist.token_probs[v];
                if (u < acc) {
                    ++tokens[v];
                    break;
                }
            }
        }
    }
    const double mask_expect = (1.0 - alpha_s) * trials;
    const double mask_sigma = std::sqrt((1.0 - alpha_s) * alpha_s * trials);
    CHECK(std::abs(masked - mask_expect) < 4.0 * mask_sigma);
    for (int v = 0; v < 2; ++v) {
        const double expect = alpha_s * p[v] * trials;
        const double sigma = std::sqrt(alpha_s * p[v] * (1.0 - alpha_s * p[v]) * trials);
        CHECK(std::abs(tokens[v] - expect) < 4.0 * sigma);
    }
}

TEST_CASE("predictor probability floors are counted") {
    // point-mass predictor on token 0 gives the truth zero mass at token 1
    const std::vector<std::pair<TokenSeq, double>> source = {{{0}, 1.0}};
    const ExactPosteriorPredictor wrong(source, 2, 2);
    const auto batch = repeated(TokenSeq{1}, 8);
    const auto est = elbo_loss(batch, wrong, Schedule::linear(), 100, 23, 2);
    CHECK(est.clamp_count > 0);
    CHECK(est.value > 0.0);
}

TEST_CASE("curriculum sampler moves from clean to noisy") {
    CurriculumSampler sampler{10000, 0.15, 1e-3};
    std::mt19937_64 rng(6);
    double early = 0.0, late = 0.0;
    for (int i = 0; i < 10000; ++i) early += curriculum_sample_t(sampler, 0, rng);
    for (int i = 0; i < 10000; ++i) late += curriculum_sample_t(sampler, 10000, rng);
    CHECK(early / 10000.0 < 0.2);
    CHECK(late / 10000.0 > 0.8);

    for (int i = 0; i < 1000; ++i) {
        const double t = curriculum_sample_t(sampler, 5000, rng);
        CHECK(t >= sampler.floor_t);
        CHECK(t <= 1.0);
    }

    CHECK(curriculum_sample_t(sampler, 100, std::uint64_t{9}) ==
          curriculum_sample_t(sampler, 100, std::uint64_t{9}));
    CHECK_THROWS_AS(curriculum_sample_t(sampler, -1, rng), std::invalid_argument);
    CHECK_THROWS_AS(curriculum_sample_t(sampler, 10001, rng), std::invalid_argument);
}

TEST_CASE("a very wide curriculum window approaches the uniform draw") {
    CurriculumSampler sampler{100, 100.0, 1e-3};
    std::mt19937_64 rng(8);
    std::vector<double> samples(10000);
    for (auto& v : samples) v = curriculum_sample_t(sampler, 50, rng);
    std::sort(samples.begin(), samples.end());
    // Kolmogorov-Smirnov distance against Uniform(floor_t, 1)
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] - sampler.floor_t) / (1.0 - sampler.floor_t);
        ks = std::max(ks, std::abs(cdf - (i + 1.0) / samples.size()));
        ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / samples.size()));
    }
    CHECK(ks < 0.05);
}
