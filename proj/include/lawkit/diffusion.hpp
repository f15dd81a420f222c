#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace lawkit {

using TokenSeq = std::vector<int>;

enum class ScheduleKind { linear, poly2, cosine, custom };

/// Noise schedule alpha(t): the probability a token is still clean at noise
/// level t, with alpha(0) = 1 and alpha(1) = 0, strictly decreasing.
/// weight(t) = alpha'(t) / (alpha(t) - 1) is the cross-entropy reweighting
/// that turns the masked objective into a likelihood bound; it equals 1/t
/// for the linear schedule.
class Schedule {
  public:
    static Schedule linear();
    static Schedule poly2();
    static Schedule cosine();
    /// Tabulated (t, alpha) pairs covering t = 0..1; interpolated piecewise
    /// linearly (monotone by validation); alpha' is the segment slope.
    static Schedule custom(std::vector<std::pair<double, double>> table);

    double alpha(double t) const;        // t in [0, 1]
    double alpha_prime(double t) const;  // derivative of alpha
    double weight(double t) const;       // t in (0, 1]; diverges at t = 0

    ScheduleKind kind() const { return kind_; }

  private:
    explicit Schedule(ScheduleKind kind) : kind_(kind) {}
    ScheduleKind kind_;
    std::vector<std::pair<double, double>> table_;
};

enum class Kernel { masked, uniform };

struct CorruptedBatch {
    std::vector<TokenSeq> original;
    std::vector<TokenSeq> corrupted;
    // Latent corruption indicator per position (a uniform-kernel resample can
    // coincide with the original token; it still counts as corrupted).
    std::vector<std::vector<std::uint8_t>> altered;
    std::vector<double> t_values;  // one noise level per sequence
    int mask_id = -1;
    Kernel kernel = Kernel::masked;
};

/// Each position is independently kept with probability alpha(t), otherwise
/// set to mask_id (masked kernel) or to a uniform vocabulary draw (uniform
/// kernel; the draw may reproduce the original token). Deterministic given
/// seed. mask_id must not occur in the input for the masked kernel.
CorruptedBatch forward_corrupt(const std::vector<TokenSeq>& batch, double t,
                               const Schedule& schedule, Kernel kernel, int vocab_size,
                               int mask_id, std::uint64_t seed);
CorruptedBatch forward_corrupt(const std::vector<TokenSeq>& batch,
                               const std::vector<double>& t_per_sequence,
                               const Schedule& schedule, Kernel kernel, int vocab_size,
                               int mask_id, std::uint64_t seed);

/// Continuous-time transition-rate matrix entry. Uniform kernel: constant
/// rate 1 between distinct tokens, 1-K on the diagonal. Masked (absorbing)
/// kernel with the mask at index K-1: -1 on non-mask diagonal entries, 1
/// across the mask row, 0 elsewhere (including the mask diagonal).
double rate_matrix_entry(Kernel kernel, int i, int j, int vocab_size);

struct ReverseDistribution {
    std::vector<double> token_probs;
    double mask_prob = 0.0;
};

/// One reverse step t -> s_next (0 <= s_next < t <= 1). Revealed tokens stay
/// fixed; a masked position stays masked with probability
/// (1 - alpha(s_next)) / (1 - alpha(t)) and otherwise reveals a token drawn
/// from predictor_dist.
ReverseDistribution reverse_transition(const Schedule& schedule, double t, double s_next,
                                       std::optional<int> revealed_token,
                                       const std::vector<double>& predictor_dist);

/// Token predictor over a corrupted sequence; returns a normalized
/// distribution over the vocabulary for the given position.
class Predictor {
  public:
    virtual ~Predictor() = default;
    virtual std::vector<double> predict(const TokenSeq& corrupted, int position) const = 0;
};

class UniformPredictor : public Predictor {
  public:
    explicit UniformPredictor(int vocab_size);
    std::vector<double> predict(const TokenSeq&, int) const override;

  private:
    int vocab_size_;
};

/// Empirical unigram counter with add-one smoothing; ignores context.
class UnigramPredictor : public Predictor {
  public:
    UnigramPredictor(const std::vector<TokenSeq>& corpus, int vocab_size);
    std::vector<double> predict(const TokenSeq&, int) const override;

  private:
    std::vector<double> probs_;
};

/// Point mass on whatever token sits at the queried position.
class CopyPredictor : public Predictor {
  public:
    explicit CopyPredictor(int vocab_size);
    std::vector<double> predict(const TokenSeq& corrupted, int position) const override;

  private:
    int vocab_size_;
};

/// Exact data posterior for an enumerable source under the masked kernel:
/// p(x0 = v | visible tokens) by summing source probabilities over the
/// sequences consistent with every unmasked position. With a single-sequence
/// source this is the perfect predictor.
class ExactPosteriorPredictor : public Predictor {
  public:
    ExactPosteriorPredictor(std::vector<std::pair<TokenSeq, double>> source,
                            int vocab_size, int mask_id);
    std::vector<double> predict(const TokenSeq& corrupted, int position) const override;

  private:
    std::vector<std::pair<TokenSeq, double>> source_;
    int vocab_size_;
    int mask_id_;
};

/// Per-position Bayes posterior for an i.i.d. source under the uniform
/// kernel at a fixed keep-probability alpha:
/// p(v | c) proportional to marginal[v] * (alpha * [v == c] + (1 - alpha)/K).
class IndependentUniformPosteriorPredictor : public Predictor {
  public:
    IndependentUniformPosteriorPredictor(std::vector<double> marginal, double keep_alpha);
    std::vector<double> predict(const TokenSeq& corrupted, int position) const override;

  private:
    std::vector<double> marginal_;
    double keep_alpha_;
};

struct LossEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long clamp_count = 0;  // predictor gave the truth <= 0 probability
    int replicates = 0;
};

/// Monte Carlo estimate of the masked-diffusion bound: per replicate draw
/// t ~ Uniform(eps, 1) (or use fixed_t), corrupt with the masked kernel, sum
/// -log p over masked positions, weight by weight(t), normalize per token.
/// Zero predictor probabilities are floored at 1e-12 and counted.
LossEstimate elbo_loss(const std::vector<TokenSeq>& batch, const Predictor& predictor,
                       const Schedule& schedule, int mc_samples, std::uint64_t seed,
                       int mask_id, double eps = 1e-3,
                       std::optional<double> fixed_t = std::nullopt);

/// Same corruption, no reweighting: mean -log p per masked position.
/// Replicates with zero masked positions are redrawn.
LossEstimate maskgit_loss(const std::vector<TokenSeq>& batch, const Predictor& predictor,
                          const Schedule& schedule, int mc_samples, std::uint64_t seed,
                          int mask_id, double eps = 1e-3,
                          std::optional<double> fixed_t = std::nullopt);

enum class CleanAveraging { per_position, per_sequence };

struct UniformKernelLoss {
    LossEstimate noisy;
    LossEstimate clean;
};

/// Uniform-kernel scoring: corrupted positions are reweighted like
/// elbo_loss, clean positions contribute an unweighted mean NLL (per
/// position by default, per sequence via the flag); both are reported.
UniformKernelLoss uniform_kernel_loss(const std::vector<TokenSeq>& batch,
                                      const Predictor& predictor, const Schedule& schedule,
                                      int mc_samples, std::uint64_t seed, int vocab_size,
                                      double eps = 1e-3,
                                      std::optional<double> fixed_t = std::nullopt,
                                      CleanAveraging averaging = CleanAveraging::per_position);

/// Easy-to-hard noise curriculum: t ~ Normal(step/total_steps, sigma),
/// rejection-resampled into [floor_t, 1].
struct CurriculumSampler {
    long total_steps = 0;
    double sigma = 0.15;
    double floor_t = 1e-3;
};

double curriculum_sample_t(const CurriculumSampler& sampler, long step,
                           std::mt19937_64& rng);
double curriculum_sample_t(const CurriculumSampler& sampler, long step,
                           std::uint64_t seed);

}  // namespace lawkit
