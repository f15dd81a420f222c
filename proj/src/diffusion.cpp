#include "lawkit/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lawkit/util.hpp"

namespace lawkit {

namespace {

constexpr double kLogFloor = 1e-12;

void check_unit_interval(double t, const char* who) {
    if (!(t >= 0.0) || !(t <= 1.0)) {
        throw std::domain_error(std::string(who) + ": t must be in [0, 1]");
    }
}

}  // namespace

Schedule Schedule::linear() { return Schedule(ScheduleKind::linear); }
Schedule Schedule::poly2() { return Schedule(ScheduleKind::poly2); }
Schedule Schedule::cosine() { return Schedule(ScheduleKind::cosine); }

Schedule Schedule::custom(std::vector<std::pair<double, double>> table) {
    if (table.size() < 2) throw std::invalid_argument("Schedule::custom: need >= 2 rows");
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        if (!(table[i].first < table[i + 1].first)) {
            throw std::invalid_argument("Schedule::custom: t must be strictly increasing");
        }
        if (!(table[i].second > table[i + 1].second)) {
            throw std::invalid_argument("Schedule::custom: alpha must be strictly decreasing");
        }
    }
    if (std::abs(table.front().first) > 1e-12 || std::abs(table.back().first - 1.0) > 1e-12) {
        throw std::invalid_argument("Schedule::custom: table must span t = 0..1");
    }
    if (std::abs(table.front().second - 1.0) > 1e-9 || std::abs(table.back().second) > 1e-9) {
        throw std::invalid_argument("Schedule::custom: need alpha(0) = 1 and alpha(1) = 0");
    }
    Schedule s(ScheduleKind::custom);
    s.table_ = std::move(table);
    return s;
}

double Schedule::alpha(double t) const {
    check_unit_interval(t, "schedule alpha");
    switch (kind_) {
        case ScheduleKind::linear: return 1.0 - t;
        case ScheduleKind::poly2: return 1.0 - t * t;
        case ScheduleKind::cosine:
            return 1.0 - std::cos(std::numbers::pi / 2.0 * (1.0 - t));
        case ScheduleKind::custom: break;
    }
    auto it = std::upper_bound(table_.begin(), table_.end(), t,
                               [](double v, const auto& row) { return v < row.first; });
    if (it == table_.begin()) return table_.front().second;
    if (it == table_.end()) return table_.back().second;
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const double frac = (t - lo.first) / (hi.first - lo.first);
    return lo.second + frac * (hi.second - lo.second);
}

double Schedule::alpha_prime(double t) const {
    check_unit_interval(t, "schedule alpha_prime");
    switch (kind_) {
        case ScheduleKind::linear: return -1.0;
        case ScheduleKind::poly2: return -2.0 * t;
        case ScheduleKind::cosine:
            return -std::numbers::pi / 2.0 * std::sin(std::numbers::pi / 2.0 * (1.0 - t));
        case ScheduleKind::custom: break;
    }
    // slope of the segment containing t (right-open; t = 1 uses the last one)
    std::size_t seg = table_.size() - 2;
    for (std::size_t i = 0; i + 1 < table_.size(); ++i) {
        if (t < table_[i + 1].first) {
            seg = i;
            break;
        }
    }
    return (table_[seg + 1].second - table_[seg].second) /
           (table_[seg + 1].first - table_[seg].first);
}

double Schedule::weight(double t) const {
    if (!(t > 0.0)) {
        throw std::domain_error("schedule weight: diverges at t = 0");
    }
    if (!(t <= 1.0)) {
        throw std::domain_error("schedule weight: t must be in (0, 1]");
    }
    return alpha_prime(t) / (alpha(t) - 1.0);
}

namespace {

void corrupt_into(const std::vector<TokenSeq>& batch, const std::vector<double>& ts,
                  const Schedule& schedule, Kernel kernel, int vocab_size, int mask_id,
                  std::mt19937_64& rng, CorruptedBatch& out) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> vocab_draw(0, std::max(1, vocab_size) - 1);
    out.original = batch;
    out.corrupted = batch;
    out.altered.assign(batch.size(), {});
    out.t_values = ts;
    out.mask_id = mask_id;
    out.kernel = kernel;
    for (std::size_t s = 0; s < batch.size(); ++s) {
        const double keep = schedule.alpha(ts[s]);
        out.altered[s].assign(batch[s].size(), 0);
        for (std::size_t i = 0; i < batch[s].size(); ++i) {
            if (unit(rng) < keep) continue;
            out.altered[s][i] = 1;
            out.corrupted[s][i] = kernel == Kernel::masked ? mask_id : vocab_draw(rng);
        }
    }
}

void validate_corrupt_args(const std::vector<TokenSeq>& batch, Kernel kernel,
                           int vocab_size, int mask_id) {
    if (kernel == Kernel::uniform && vocab_size < 2) {
        throw std::invalid_argument("forward_corrupt: uniform kernel needs vocab_size >= 2");
    }
    if (kernel == Kernel::masked) {
        for (const auto& seq : batch) {
            for (int tok : seq) {
                if (tok == mask_id) {
                    throw std::invalid_argument(
                        "forward_corrupt: mask_id collides with an input token");
                }
            }
        }
    }
}

}  // namespace

CorruptedBatch forward_corrupt(const std::vector<TokenSeq>& batch,
                               const std::vector<double>& t_per_sequence,
                               const Schedule& schedule, Kernel kernel, int vocab_size,
                               int mask_id, std::uint64_t seed) {
    if (t_per_sequence.size() != batch.size()) {
        throw std::invalid_argument("forward_corrupt: one t per sequence required");
    }
    for (double t : t_per_sequence) check_unit_interval(t, "forward_corrupt");
    validate_corrupt_args(batch, kernel, vocab_size, mask_id);
    CorruptedBatch out;
    std::mt19937_64 rng(seed);
    corrupt_into(batch, t_per_sequence, schedule, kernel, vocab_size, mask_id, rng, out);
    return out;
}

CorruptedBatch forward_corrupt(const std::vector<TokenSeq>& batch, double t,
                               const Schedule& schedule, Kernel kernel, int vocab_size,
                               int mask_id, std::uint64_t seed) {
    return forward_corrupt(batch, std::vector<double>(batch.size(), t), schedule, kernel,
                           vocab_size, mask_id, seed);
}

double rate_matrix_entry(Kernel kernel, int i, int j, int vocab_size) {
    if (vocab_size < 2 || i < 0 || j < 0 || i >= vocab_size || j >= vocab_size) {
        throw std::out_of_range("rate_matrix_entry: index out of range");
    }
    if (kernel == Kernel::uniform) {
        return i == j ? 1.0 - vocab_size : 1.0;
    }
    const int mask = vocab_size - 1;
    if (i == mask) return j == mask ? 0.0 : 1.0;
    return i == j ? -1.0 : 0.0;
}

ReverseDistribution reverse_transition(const Schedule& schedule, double t, double s_next,
                                       std::optional<int> revealed_token,
                                       const std::vector<double>& predictor_dist) {
    if (!(s_next >= 0.0) || !(s_next < t) || !(t <= 1.0)) {
        throw std::invalid_argument("reverse_transition: need 0 <= s_next < t <= 1");
    }
    double sum = 0.0;
    for (double p : predictor_dist) {
        if (p < 0.0) throw std::invalid_argument("reverse_transition: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
        throw std::invalid_argument("reverse_transition: predictor_dist not normalized");
    }

    ReverseDistribution out;
    out.token_probs.assign(predictor_dist.size(), 0.0);
    if (revealed_token) {
        if (*revealed_token < 0 ||
            static_cast<std::size_t>(*revealed_token) >= predictor_dist.size()) {
            throw std::out_of_range("reverse_transition: revealed token out of range");
        }
        out.token_probs[*revealed_token] = 1.0;  // already-revealed tokens stay fixed
        return out;
    }
    const double alpha_t = schedule.alpha(t);
    const double alpha_s = schedule.alpha(s_next);
    out.mask_prob = (1.0 - alpha_s) / (1.0 - alpha_t);
    const double reveal = (alpha_s - alpha_t) / (1.0 - alpha_t);
    for (std::size_t v = 0; v < predictor_dist.size(); ++v) {
        out.token_probs[v] = reveal * predictor_dist[v];
    }
    return out;
}

UniformPredictor::UniformPredictor(int vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size < 1) throw std::invalid_argument("UniformPredictor: empty vocabulary");
}

std::vector<double> UniformPredictor::predict(const TokenSeq&, int) const {
    return std::vector<double>(vocab_size_, 1.0 / vocab_size_);
}

UnigramPredictor::UnigramPredictor(const std::vector<TokenSeq>& corpus, int vocab_size) {
    if (vocab_size < 1) throw std::invalid_argument("UnigramPredictor: empty vocabulary");
    std::vector<double> counts(vocab_size, 1.0);  // add-one smoothing
    double total = vocab_size;
    for (const auto& seq : corpus) {
        for (int tok : seq) {
            if (tok < 0 || tok >= vocab_size) {
                throw std::invalid_argument("UnigramPredictor: token outside vocabulary");
            }
            counts[tok] += 1.0;
            total += 1.0;
        }
    }
    probs_ = counts;
    for (double& p : probs_) p /= total;
}

std::vector<double> UnigramPredictor::predict(const TokenSeq&, int) const { return probs_; }

CopyPredictor::CopyPredictor(int vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size < 1) throw std::invalid_argument("CopyPredictor: empty vocabulary");
}

std::vector<double> CopyPredictor::predict(const TokenSeq& corrupted, int position) const {
    std::vector<double> out(vocab_size_, 0.0);
    const int tok = corrupted[position];
    if (tok >= 0 && tok < vocab_size_) {
        out[tok] = 1.0;
    } else {
        std::fill(out.begin(), out.end(), 1.0 / vocab_size_);  // masked slot: no opinion
    }
    return out;
}

ExactPosteriorPredictor::ExactPosteriorPredictor(
    std::vector<std::pair<TokenSeq, double>> source, int vocab_size, int mask_id)
    : source_(std::move(source)), vocab_size_(vocab_size), mask_id_(mask_id) {
    if (source_.empty()) throw std::invalid_argument("ExactPosteriorPredictor: empty source");
    double total = 0.0;
    for (const auto& [seq, p] : source_) {
        if (p < 0.0) throw std::invalid_argument("ExactPosteriorPredictor: negative prob");
        total += p;
    }
    for (auto& [seq, p] : source_) p /= total;
}

std::vector<double> ExactPosteriorPredictor::predict(const TokenSeq& corrupted,
                                                     int position) const {
    std::vector<double> out(vocab_size_, 0.0);
    double total = 0.0;
    for (const auto& [seq, p] : source_) {
        if (seq.size() != corrupted.size()) continue;
        bool consistent = true;
        for (std::size_t i = 0; i < seq.size(); ++i) {
            if (corrupted[i] != mask_id_ && corrupted[i] != seq[i]) {
                consistent = false;
                break;
            }
        }
        if (!consistent) continue;
        out[seq[position]] += p;
        total += p;
    }
    if (total <= 0.0) {
        // context impossible under the source; fall back to indifference
        std::fill(out.begin(), out.end(), 1.0 / vocab_size_);
        return out;
    }
    for (double& v : out) v /= total;
    return out;
}

IndependentUniformPosteriorPredictor::IndependentUniformPosteriorPredictor(
    std::vector<double> marginal, double keep_alpha)
    : marginal_(std::move(marginal)), keep_alpha_(keep_alpha) {
    if (marginal_.empty()) {
        throw std::invalid_argument("IndependentUniformPosteriorPredictor: empty marginal");
    }
    double total = 0.0;
    for (double p : marginal_) total += p;
    for (double& p : marginal_) p /= total;
}

std::vector<double> IndependentUniformPosteriorPredictor::predict(const TokenSeq& corrupted,
                                                                  int position) const {
    const int k = static_cast<int>(marginal_.size());
    const int obs = corrupted[position];
    std::vector<double> out(k);
    double total = 0.0;
    for (int v = 0; v < k; ++v) {
        const double like = keep_alpha_ * (v == obs ? 1.0 : 0.0) + (1.0 - keep_alpha_) / k;
        out[v] = marginal_[v] * like;
        total += out[v];
    }
    for (double& p : out) p /= total;
    return out;
}

namespace {

struct ReplicateScore {
    double noisy_sum = 0.0;  // sum of -log p over altered positions
    long noisy_count = 0;
    double clean_sum = 0.0;
    long clean_count = 0;
    double clean_per_seq = 0.0;  // mean over sequences of per-seq clean means
    long clean_seq_count = 0;
    long noisy_clamps = 0;
    long clean_clamps = 0;
};

// NLL of the true token under the predictor, floored.
double nll_of_truth(const Predictor& predictor, const TokenSeq& corrupted, int position,
                    int truth, long& clamps) {
    const auto dist = predictor.predict(corrupted, position);
    double p = 0.0;
    if (truth >= 0 && static_cast<std::size_t>(truth) < dist.size()) p = dist[truth];
    if (!(p > kLogFloor)) {
        ++clamps;
        p = kLogFloor;
    }
    return -std::log(p);
}

ReplicateScore score_batch(const CorruptedBatch& cb, const Predictor& predictor,
                           bool score_clean) {
    ReplicateScore sc;
    for (std::size_t s = 0; s < cb.original.size(); ++s) {
        double seq_clean_sum = 0.0;
        long seq_clean_count = 0;
        for (std::size_t i = 0; i < cb.original[s].size(); ++i) {
            const bool noisy = cb.altered[s][i] != 0;
            if (!noisy && !score_clean) continue;
            long& clamps = noisy ? sc.noisy_clamps : sc.clean_clamps;
            const double nll = nll_of_truth(predictor, cb.corrupted[s],
                                            static_cast<int>(i), cb.original[s][i], clamps);
            if (noisy) {
                sc.noisy_sum += nll;
                ++sc.noisy_count;
            } else {
                sc.clean_sum += nll;
                ++sc.clean_count;
                seq_clean_sum += nll;
                ++seq_clean_count;
            }
        }
        if (seq_clean_count > 0) {
            sc.clean_per_seq += seq_clean_sum / seq_clean_count;
            ++sc.clean_seq_count;
        }
    }
    return sc;
}

LossEstimate summarize(const std::vector<double>& values, long clamps) {
    LossEstimate est;
    est.replicates = static_cast<int>(values.size());
    est.clamp_count = clamps;
    if (values.empty()) return est;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    if (values.size() > 1) var /= (values.size() - 1);
    est.value = mean;
    est.std_error = std::sqrt(var / values.size());
    return est;
}

long total_positions(const std::vector<TokenSeq>& batch) {
    long total = 0;
    for (const auto& seq : batch) total += static_cast<long>(seq.size());
    if (total == 0) throw std::invalid_argument("diffusion loss: empty batch");
    return total;
}

}  // namespace

LossEstimate elbo_loss(const std::vector<TokenSeq>& batch, const Predictor& predictor,
                       const Schedule& schedule, int mc_samples, std::uint64_t seed,
                       int mask_id, double eps, std::optional<double> fixed_t) {
    if (mc_samples < 1) throw std::invalid_argument("elbo_loss: mc_samples must be >= 1");
    const long n_tokens = total_positions(batch);
    validate_corrupt_args(batch, Kernel::masked, 0, mask_id);

    std::vector<double> values(mc_samples);
    long clamps = 0;
    CorruptedBatch cb;
    for (int r = 0; r < mc_samples; ++r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::uniform_real_distribution<double> t_draw(eps, 1.0);
        const double t = fixed_t ? *fixed_t : t_draw(rng);
        corrupt_into(batch, std::vector<double>(batch.size(), t), schedule,
                     Kernel::masked, 0, mask_id, rng, cb);
        const auto sc = score_batch(cb, predictor, /*score_clean=*/false);
        clamps += sc.noisy_clamps;
        values[r] =
            sc.noisy_count == 0 ? 0.0 : schedule.weight(t) * sc.noisy_sum / n_tokens;
    }
    return summarize(values, clamps);
}

LossEstimate maskgit_loss(const std::vector<TokenSeq>& batch, const Predictor& predictor,
                          const Schedule& schedule, int mc_samples, std::uint64_t seed,
                          int mask_id, double eps, std::optional<double> fixed_t) {
    if (mc_samples < 1) throw std::invalid_argument("maskgit_loss: mc_samples must be >= 1");
    total_positions(batch);
    validate_corrupt_args(batch, Kernel::masked, 0, mask_id);

    std::vector<double> values(mc_samples);
    long clamps = 0;
    CorruptedBatch cb;
    for (int r = 0; r < mc_samples; ++r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::uniform_real_distribution<double> t_draw(eps, 1.0);
        ReplicateScore sc;
        for (int attempt = 0;; ++attempt) {
            if (attempt >= 10000) {
                throw std::runtime_error("maskgit_loss: cannot draw a masked position");
            }
            const double t = fixed_t ? *fixed_t : t_draw(rng);
            corrupt_into(batch, std::vector<double>(batch.size(), t), schedule,
                         Kernel::masked, 0, mask_id, rng, cb);
            sc = score_batch(cb, predictor, /*score_clean=*/false);
            if (sc.noisy_count > 0) break;
            if (fixed_t) {
                throw std::runtime_error(
                    "maskgit_loss: fixed t produced no masked positions");
            }
        }
        clamps += sc.noisy_clamps;
        values[r] = sc.noisy_sum / sc.noisy_count;
    }
    return summarize(values, clamps);
}

UniformKernelLoss uniform_kernel_loss(const std::vector<TokenSeq>& batch,
                                      const Predictor& predictor, const Schedule& schedule,
                                      int mc_samples, std::uint64_t seed, int vocab_size,
                                      double eps, std::optional<double> fixed_t,
                                      CleanAveraging averaging) {
    if (mc_samples < 1) {
        throw std::invalid_argument("uniform_kernel_loss: mc_samples must be >= 1");
    }
    const long n_tokens = total_positions(batch);
    validate_corrupt_args(batch, Kernel::uniform, vocab_size, -1);

    std::vector<double> noisy_values(mc_samples);
    std::vector<double> clean_values;
    clean_values.reserve(mc_samples);
    long noisy_clamps = 0, clean_clamps = 0;
    CorruptedBatch cb;
    for (int r = 0; r < mc_samples; ++r) {
        std::mt19937_64 rng(derive_seed(seed, r));
        std::uniform_real_distribution<double> t_draw(eps, 1.0);
        const double t = fixed_t ? *fixed_t : t_draw(rng);
        corrupt_into(batch, std::vector<double>(batch.size(), t), schedule,
                     Kernel::uniform, vocab_size, -1, rng, cb);
        const auto sc = score_batch(cb, predictor, /*score_clean=*/true);
        noisy_values[r] =
            sc.noisy_count == 0 ? 0.0 : schedule.weight(t) * sc.noisy_sum / n_tokens;
        if (averaging == CleanAveraging::per_position) {
            if (sc.clean_count > 0) clean_values.push_back(sc.clean_sum / sc.clean_count);
        } else {
            if (sc.clean_seq_count > 0) {
                clean_values.push_back(sc.clean_per_seq / sc.clean_seq_count);
            }
        }
        noisy_clamps += sc.noisy_clamps;
        clean_clamps += sc.clean_clamps;
    }
    UniformKernelLoss out;
    out.noisy = summarize(noisy_values, noisy_clamps);
    out.clean = summarize(clean_values, clean_clamps);
    return out;
}

double curriculum_sample_t(const CurriculumSampler& sampler, long step,
                           std::mt19937_64& rng) {
    if (sampler.total_steps < 1 || step < 0 || step > sampler.total_steps) {
        throw std::invalid_argument("curriculum_sample_t: step outside [0, total_steps]");
    }
    if (!(sampler.sigma > 0.0) || !(sampler.floor_t > 0.0) || sampler.floor_t >= 1.0) {
        throw std::invalid_argument("curriculum_sample_t: bad sampler parameters");
    }
    const double mean = static_cast<double>(step) / sampler.total_steps;
    std::normal_distribution<double> normal(mean, sampler.sigma);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const double t = normal(rng);
        if (t >= sampler.floor_t && t <= 1.0) return t;
    }
    throw std::runtime_error("curriculum_sample_t: rejection sampling failed");
}

double curriculum_sample_t(const CurriculumSampler& sampler, long step, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return curriculum_sample_t(sampler, step, rng);
}

}  // namespace lawkit
