#pragma once

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lawkit {

/// One training run's final observation: the atom every fit consumes.
/// epochs = total_tokens / unique_tokens; flops defaults to 6*N*D.
struct RunRecord {
    std::string run_id;
    double n_params = 0.0;
    double unique_tokens = 0.0;
    double total_tokens = 0.0;
    double epochs = 0.0;
    double flops = 0.0;
    double final_train_loss = 0.0;
    std::optional<double> final_val_loss;
};

struct LossPoint {
    long step = 0;
    double loss = 0.0;
};

/// Per-step loss curve for one run; steps strictly increasing.
struct LossSeries {
    std::string run_id;
    std::vector<LossPoint> points;
};

struct ArchSpec {
    long d_model = 0;
    long ffw_size = 0;
    long kv_size = 0;
    long n_heads = 0;
    long n_layers = 0;
    long vocab_size = 50257;
};

enum class RunFormat { csv, jsonl };

/// Training compute estimate: exactly 6 * N * D.
double flops_of(double n_params, double total_tokens);

/// Parses run logs from CSV (header row required, lower-case column names:
/// run_id, n_params, unique_tokens, total_tokens, epochs, flops,
/// final_train_loss, final_val_loss; epochs/flops/final_val_loss optional)
/// or JSONL with the same field names. Missing flops are filled with 6*N*D
/// and missing epochs with D/U_D. Throws std::runtime_error naming the row
/// and field on malformed input, or the run_id on an invariant violation.
std::vector<RunRecord> parse_runs(std::istream& in, RunFormat format);
std::vector<RunRecord> parse_runs_file(const std::string& path);

void serialize_runs(const std::vector<RunRecord>& records, std::ostream& out,
                    RunFormat format);

/// Loss-series CSV: columns run_id, step, loss. Rows for distinct run_ids
/// may be interleaved; each series keeps its input order.
std::vector<LossSeries> parse_loss_series(std::istream& in);
void serialize_loss_series(const std::vector<LossSeries>& series, std::ostream& out);

/// Gaussian-kernel smoother with sigma = window/6. The kernel is truncated
/// and renormalized at the series boundaries (no padding is invented, at the
/// cost of a small lag bias there). window must be odd; window == 1 is the
/// identity.
LossSeries gaussian_smooth(const LossSeries& series, int window);

/// Cuts a series at the first local minimum that is followed by `width`
/// consecutive points all above it; used to drop the second descent of
/// double-descent runs before final-loss extraction. Returns the prefix up
/// to and including that minimum, or the whole series if no such rise exists.
LossSeries truncate_at_overfit(const LossSeries& series, int width = 3);

/// Closed-form transformer parameter count:
/// per layer  2*d*(h*kv) for K/V, 2*d^2 for Q/O, 2*d*ffw for the MLP
/// in/out projections, and 2*d norm gains; plus vocab*d when
/// include_embeddings is set. Calibrated against published per-size
/// architecture tables, which count core parameters without embeddings.
double estimate_params(const ArchSpec& arch, bool include_embeddings = false);

}  // namespace lawkit
