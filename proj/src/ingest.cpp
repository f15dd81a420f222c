#include "lawkit/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "lawkit/csv.hpp"

namespace lawkit {

namespace {

constexpr double kRelTol = 1e-3;  // 0.1% consistency band for epochs and flops

double parse_positive(const std::string& s, const char* field, std::size_t row) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("parse_runs: row " + std::to_string(row) +
                                 ": field '" + field + "' is not a number: '" + s + "'");
    }
    if (pos != s.size()) {
        throw std::runtime_error("parse_runs: row " + std::to_string(row) +
                                 ": trailing junk in field '" + field + "': '" + s + "'");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::runtime_error("parse_runs: row " + std::to_string(row) +
                                 ": field '" + field + "' must be positive, got '" + s + "'");
    }
    return v;
}

void validate_record(RunRecord& r) {
    if (r.total_tokens < r.unique_tokens) {
        throw std::runtime_error("run '" + r.run_id + "': total<unique (" +
                                 csv::format_double(r.total_tokens) + " < " +
                                 csv::format_double(r.unique_tokens) + ")");
    }
    const double implied_epochs = r.total_tokens / r.unique_tokens;
    if (r.epochs <= 0.0) {
        r.epochs = implied_epochs;
    } else if (std::abs(r.epochs * r.unique_tokens / r.total_tokens - 1.0) > kRelTol) {
        throw std::runtime_error("run '" + r.run_id +
                                 "': epochs*unique_tokens != total_tokens (got epochs=" +
                                 csv::format_double(r.epochs) + ", implied " +
                                 csv::format_double(implied_epochs) + ")");
    }
    if (r.flops <= 0.0) {
        r.flops = flops_of(r.n_params, r.total_tokens);
    }
    if (!(r.final_train_loss > 0.0)) {
        throw std::runtime_error("run '" + r.run_id + "': final_train_loss must be positive");
    }
    if (r.final_val_loss && !(*r.final_val_loss > 0.0)) {
        throw std::runtime_error("run '" + r.run_id + "': final_val_loss must be positive");
    }
}

std::vector<RunRecord> parse_runs_csv(std::istream& in) {
    csv::Table t = csv::read(in);
    static const char* kRequired[] = {"run_id", "n_params", "unique_tokens",
                                      "total_tokens", "final_train_loss"};
    for (const char* name : kRequired) {
        if (!t.column(name)) {
            throw std::runtime_error(std::string("parse_runs: missing required column '") +
                                     name + "'");
        }
    }
    const auto c_id = *t.column("run_id");
    const auto c_n = *t.column("n_params");
    const auto c_u = *t.column("unique_tokens");
    const auto c_d = *t.column("total_tokens");
    const auto c_loss = *t.column("final_train_loss");
    const auto c_e = t.column("epochs");
    const auto c_f = t.column("flops");
    const auto c_val = t.column("final_val_loss");

    std::vector<RunRecord> records;
    records.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::size_t rowno = i + 1;
        if (row.size() < t.header.size()) {
            throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                     ": expected " + std::to_string(t.header.size()) +
                                     " fields, got " + std::to_string(row.size()));
        }
        RunRecord r;
        r.run_id = row[c_id];
        if (r.run_id.empty()) {
            throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                     ": field 'run_id' is empty");
        }
        r.n_params = parse_positive(row[c_n], "n_params", rowno);
        r.unique_tokens = parse_positive(row[c_u], "unique_tokens", rowno);
        r.total_tokens = parse_positive(row[c_d], "total_tokens", rowno);
        r.final_train_loss = parse_positive(row[c_loss], "final_train_loss", rowno);
        if (c_e && !row[*c_e].empty()) r.epochs = parse_positive(row[*c_e], "epochs", rowno);
        if (c_f && !row[*c_f].empty()) r.flops = parse_positive(row[*c_f], "flops", rowno);
        if (c_val && !row[*c_val].empty()) {
            r.final_val_loss = parse_positive(row[*c_val], "final_val_loss", rowno);
        }
        validate_record(r);
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<RunRecord> parse_runs_jsonl(std::istream& in) {
    std::vector<RunRecord> records;
    std::string line;
    std::size_t rowno = 0;
    while (std::getline(in, line)) {
        ++rowno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                     ": bad JSON: " + e.what());
        }
        auto require = [&](const char* field) -> double {
            if (!j.contains(field) || !j[field].is_number()) {
                throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                         ": missing numeric field '" + field + "'");
            }
            double v = j[field].get<double>();
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                         ": field '" + field + "' must be positive");
            }
            return v;
        };
        RunRecord r;
        if (!j.contains("run_id") || !j["run_id"].is_string() ||
            j["run_id"].get<std::string>().empty()) {
            throw std::runtime_error("parse_runs: row " + std::to_string(rowno) +
                                     ": missing field 'run_id'");
        }
        r.run_id = j["run_id"].get<std::string>();
        r.n_params = require("n_params");
        r.unique_tokens = require("unique_tokens");
        r.total_tokens = require("total_tokens");
        r.final_train_loss = require("final_train_loss");
        if (j.contains("epochs") && !j["epochs"].is_null()) r.epochs = require("epochs");
        if (j.contains("flops") && !j["flops"].is_null()) r.flops = require("flops");
        if (j.contains("final_val_loss") && !j["final_val_loss"].is_null()) {
            r.final_val_loss = require("final_val_loss");
        }
        validate_record(r);
        records.push_back(std::move(r));
    }
    return records;
}

}  // namespace

double flops_of(double n_params, double total_tokens) {
    if (!(n_params > 0.0) || !(total_tokens > 0.0)) {
        throw std::invalid_argument("flops_of: n_params and total_tokens must be positive");
    }
    return 6.0 * n_params * total_tokens;
}

std::vector<RunRecord> parse_runs(std::istream& in, RunFormat format) {
    return format == RunFormat::csv ? parse_runs_csv(in) : parse_runs_jsonl(in);
}

std::vector<RunRecord> parse_runs_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    const bool jsonl = path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
    return parse_runs(in, jsonl ? RunFormat::jsonl : RunFormat::csv);
}

void serialize_runs(const std::vector<RunRecord>& records, std::ostream& out,
                    RunFormat format) {
    if (format == RunFormat::csv) {
        out << "run_id,n_params,unique_tokens,total_tokens,epochs,flops,"
               "final_train_loss,final_val_loss\n";
        for (const auto& r : records) {
            out << r.run_id << ',' << csv::format_double(r.n_params) << ','
                << csv::format_double(r.unique_tokens) << ','
                << csv::format_double(r.total_tokens) << ','
                << csv::format_double(r.epochs) << ',' << csv::format_double(r.flops)
                << ',' << csv::format_double(r.final_train_loss) << ',';
            if (r.final_val_loss) out << csv::format_double(*r.final_val_loss);
            out << '\n';
        }
        return;
    }
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["run_id"] = r.run_id;
        j["n_params"] = r.n_params;
        j["unique_tokens"] = r.unique_tokens;
        j["total_tokens"] = r.total_tokens;
        j["epochs"] = r.epochs;
        j["flops"] = r.flops;
        j["final_train_loss"] = r.final_train_loss;
        if (r.final_val_loss) j["final_val_loss"] = *r.final_val_loss;
        out << j.dump() << '\n';
    }
}

std::vector<LossSeries> parse_loss_series(std::istream& in) {
    csv::Table t = csv::read(in);
    for (const char* name : {"run_id", "step", "loss"}) {
        if (!t.column(name)) {
            throw std::runtime_error(std::string("parse_loss_series: missing column '") +
                                     name + "'");
        }
    }
    const auto c_id = *t.column("run_id");
    const auto c_step = *t.column("step");
    const auto c_loss = *t.column("loss");
    std::vector<LossSeries> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (row.size() <= std::max({c_id, c_step, c_loss})) {
            throw std::runtime_error("parse_loss_series: row " + std::to_string(i + 1) +
                                     ": too few fields");
        }
        const std::string& id = row[c_id];
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const LossSeries& s) { return s.run_id == id; });
        if (it == out.end()) {
            out.push_back(LossSeries{id, {}});
            it = out.end() - 1;
        }
        LossPoint p;
        try {
            std::size_t pos = 0;
            p.step = std::stol(row[c_step], &pos);
            if (pos != row[c_step].size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error("parse_loss_series: row " + std::to_string(i + 1) +
                                     ": bad step '" + row[c_step] + "'");
        }
        p.loss = parse_positive(row[c_loss], "loss", i + 1);
        if (!it->points.empty() && p.step <= it->points.back().step) {
            throw std::runtime_error("parse_loss_series: run '" + id +
                                     "': steps not strictly increasing at row " +
                                     std::to_string(i + 1));
        }
        it->points.push_back(p);
    }
    return out;
}

void serialize_loss_series(const std::vector<LossSeries>& series, std::ostream& out) {
    out << "run_id,step,loss\n";
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            out << s.run_id << ',' << p.step << ',' << csv::format_double(p.loss) << '\n';
        }
    }
}

LossSeries gaussian_smooth(const LossSeries& series, int window) {
    if (window < 1 || window % 2 == 0) {
        throw std::invalid_argument("gaussian_smooth: window must be odd and >= 1");
    }
    if (series.points.empty()) {
        throw std::invalid_argument("gaussian_smooth: empty series");
    }
    if (window == 1) return series;

    const int half = (window - 1) / 2;
    const double sigma = window / 6.0;  // +-3 sigma spans the window
    std::vector<double> kernel(window);
    for (int k = -half; k <= half; ++k) {
        kernel[k + half] = std::exp(-0.5 * (k * k) / (sigma * sigma));
    }

    LossSeries out;
    out.run_id = series.run_id;
    out.points.resize(series.points.size());
    const int n = static_cast<int>(series.points.size());
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half);
        const int hi = std::min(n - 1, i + half);
        double wsum = 0.0, vsum = 0.0;
        for (int j = lo; j <= hi; ++j) {
            const double w = kernel[j - i + half];
            wsum += w;
            vsum += w * series.points[j].loss;
        }
        out.points[i].step = series.points[i].step;
        out.points[i].loss = vsum / wsum;
    }
    return out;
}

LossSeries truncate_at_overfit(const LossSeries& series, int width) {
    if (width < 1) throw std::invalid_argument("truncate_at_overfit: width must be >= 1");
    const auto& pts = series.points;
    const int n = static_cast<int>(pts.size());
    for (int i = 0; i + width < n; ++i) {
        bool rise = true;
        for (int j = 1; j <= width; ++j) {
            if (!(pts[i + j].loss > pts[i].loss)) {
                rise = false;
                break;
            }
        }
        if (rise) {
            LossSeries out;
            out.run_id = series.run_id;
            out.points.assign(pts.begin(), pts.begin() + i + 1);
            return out;
        }
    }
    return series;
}

double estimate_params(const ArchSpec& arch, bool include_embeddings) {
    if (arch.d_model < 1 || arch.ffw_size < 1 || arch.kv_size < 1 || arch.n_heads < 1 ||
        arch.vocab_size < 1 || arch.n_layers < 0) {
        throw std::invalid_argument("estimate_params: invalid architecture");
    }
    if (arch.d_model % arch.n_heads != 0) {
        throw std::invalid_argument("estimate_params: d_model must be divisible by n_heads");
    }
    const double d = static_cast<double>(arch.d_model);
    const double kv_width = static_cast<double>(arch.n_heads) * arch.kv_size;
    const double attention = 2.0 * d * kv_width + 2.0 * d * d;  // K/V then Q/O
    const double mlp = 2.0 * d * static_cast<double>(arch.ffw_size);
    const double norms = 2.0 * d;
    double total = arch.n_layers * (attention + mlp + norms);
    if (include_embeddings) total += static_cast<double>(arch.vocab_size) * d;
    return total;
}

}  // namespace lawkit
