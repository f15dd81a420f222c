// lawkit: scaling-law analysis for diffusion language models.
// Subcommands cover run-log ingestion, loss smoothing, isoFLOP frontier
// extraction, parametric law fitting, allocation solvers, the masked
// diffusion math, and synthetic run generation.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lawkit/allocate.hpp"
#include "lawkit/builtin.hpp"
#include "lawkit/csv.hpp"
#include "lawkit/diffusion.hpp"
#include "lawkit/ingest.hpp"
#include "lawkit/isoflop.hpp"
#include "lawkit/lawfit.hpp"
#include "lawkit/oracle.hpp"
#include "lawkit/util.hpp"

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitSolver = 2;

struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::vector<double> parse_list(const std::string& csv_list, const char* what) {
    std::vector<double> values;
    std::stringstream ss(csv_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            values.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw std::runtime_error(std::string("bad ") + what + " value: '" + item + "'");
        }
    }
    if (values.empty()) throw std::runtime_error(std::string("empty ") + what + " list");
    return values;
}

lawkit::GridSpec parse_grid(const std::string& spec, const char* what) {
    // lo:hi:count
    lawkit::GridSpec g;
    std::stringstream ss(spec);
    std::string lo, hi, count;
    if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') ||
        !std::getline(ss, count, ':')) {
        throw std::runtime_error(std::string(what) + ": expected lo:hi:count, got '" +
                                 spec + "'");
    }
    g.lo = std::stod(lo);
    g.hi = std::stod(hi);
    g.count = std::stoi(count);
    return g;
}

ordered_json report_to_json(const lawkit::FitReport& report) {
    ordered_json j;
    j["law"] = lawkit::law_name(report.law);
    ordered_json coeffs;
    const auto& names = lawkit::coefficient_names(report.law);
    for (std::size_t i = 0; i < names.size(); ++i) coeffs[names[i]] = report.coefficients[i];
    j["coefficients"] = coeffs;
    j["objective_value"] = report.objective_value;
    j["n_points"] = report.n_points;
    j["init_used"] = report.init_used;
    j["converged"] = report.converged;
    return j;
}

lawkit::FitReport report_from_json(const ordered_json& j) {
    lawkit::FitReport report;
    report.law = lawkit::law_from_name(j.at("law").get<std::string>());
    const auto& names = lawkit::coefficient_names(report.law);
    for (const auto& name : names) {
        report.coefficients.push_back(j.at("coefficients").at(name).get<double>());
    }
    if (j.contains("objective_value")) report.objective_value = j["objective_value"];
    if (j.contains("n_points")) report.n_points = j["n_points"].get<std::size_t>();
    if (j.contains("converged")) report.converged = j["converged"];
    return report;
}

ordered_json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    ordered_json j;
    in >> j;
    return j;
}

// --coeffs accepts a builtin set name or a fit.json path. Plain "paper"
// picks the builtin matching the law the command needs.
lawkit::LawCoefficients load_compute_coeffs(const std::string& spec) {
    if (spec == "paper" || spec == "paper-compute") {
        return *lawkit::builtin_coefficients("paper-compute").compute;
    }
    if (spec.find(".json") != std::string::npos) {
        const auto report = report_from_json(load_json(spec));
        if (report.law != lawkit::LawKind::compute) {
            throw std::runtime_error("'" + spec + "' does not hold compute-law coefficients");
        }
        return lawkit::as_compute(report);
    }
    const auto set = lawkit::builtin_coefficients(spec);
    if (!set.compute) throw std::runtime_error("'" + spec + "' is not a compute-law set");
    return *set.compute;
}

lawkit::DataLawCoefficients load_data_coeffs(const std::string& spec) {
    if (spec == "paper" || spec == "paper-data") {
        return *lawkit::builtin_coefficients("paper-data").data;
    }
    if (spec.find(".json") != std::string::npos) {
        const auto report = report_from_json(load_json(spec));
        if (report.law != lawkit::LawKind::data) {
            throw std::runtime_error("'" + spec + "' does not hold data-law coefficients");
        }
        return lawkit::as_data(report);
    }
    const auto set = lawkit::builtin_coefficients(spec);
    if (!set.data) throw std::runtime_error("'" + spec + "' is not a data-law set");
    return *set.data;
}

lawkit::FrontierFit load_frontier(const std::string& spec) {
    if (spec == "paper" || spec == "paper-frontier") {
        return *lawkit::builtin_coefficients("paper-frontier").frontier;
    }
    if (spec.find(".json") != std::string::npos) {
        const auto j = load_json(spec);
        lawkit::FrontierFit f;
        f.n_frontier.multiplier = j.at("n_frontier").at("multiplier");
        f.n_frontier.exponent = j.at("n_frontier").at("exponent");
        f.d_frontier.multiplier = j.at("d_frontier").at("multiplier");
        f.d_frontier.exponent = j.at("d_frontier").at("exponent");
        return f;
    }
    const auto set = lawkit::builtin_coefficients(spec);
    if (!set.frontier) throw std::runtime_error("'" + spec + "' is not a frontier set");
    return *set.frontier;
}

std::vector<lawkit::TokenSeq> load_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<lawkit::TokenSeq> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        lawkit::TokenSeq seq;
        for (const auto& field : lawkit::csv::split_line(line)) {
            if (!field.empty()) seq.push_back(std::stoi(field));
        }
        if (!seq.empty()) corpus.push_back(std::move(seq));
    }
    if (corpus.empty()) throw std::runtime_error("no sequences in '" + path + "'");
    return corpus;
}

lawkit::Schedule schedule_by_name(const std::string& name) {
    if (name == "linear") return lawkit::Schedule::linear();
    if (name == "poly2") return lawkit::Schedule::poly2();
    if (name == "cosine") return lawkit::Schedule::cosine();
    throw std::runtime_error("unknown schedule '" + name + "' (linear|poly2|cosine)");
}

// ---------------------------------------------------------- subcommands

int run_ingest(const std::string& runs_path, const std::string& out,
               const std::string& to_format) {
    auto records = lawkit::parse_runs_file(runs_path);
    std::ostringstream body;
    lawkit::serialize_runs(records, body,
                           to_format == "jsonl" ? lawkit::RunFormat::jsonl
                                                : lawkit::RunFormat::csv);
    write_text(out, body.str());
    std::cerr << "ingested " << records.size() << " runs\n";
    return kExitOk;
}

int run_smooth(const std::string& series_path, int window, bool truncate,
               int truncate_width, const std::string& out) {
    std::ifstream in(series_path);
    if (!in) throw std::runtime_error("cannot open '" + series_path + "'");
    auto series = lawkit::parse_loss_series(in);
    for (auto& s : series) {
        if (truncate) s = lawkit::truncate_at_overfit(s, truncate_width);
        s = lawkit::gaussian_smooth(s, window);
    }
    std::ostringstream body;
    lawkit::serialize_loss_series(series, body);
    write_text(out, body.str());
    return kExitOk;
}

int run_isoflop(const std::string& runs_path, const std::string& budgets_csv, double tol,
                bool include_extrapolated, const std::string& out) {
    const auto records = lawkit::parse_runs_file(runs_path);
    const auto budgets = parse_list(budgets_csv, "budget");
    const auto grouping = lawkit::group_runs(records, budgets, tol);
    for (const auto& w : grouping.warnings) std::cerr << "warning: " << w << "\n";

    std::vector<lawkit::FrontierMinimum> minima;
    for (const auto& group : grouping.groups) {
        const auto parabola = lawkit::fit_parabola(group);
        minima.push_back({group.budget_flops, parabola.vertex_n_params,
                          parabola.vertex_loss, parabola.extrapolated});
    }
    const auto frontier = lawkit::fit_frontier(minima, include_extrapolated);

    ordered_json j;
    j["n_frontier"] = {{"multiplier", frontier.n_frontier.multiplier},
                       {"exponent", frontier.n_frontier.exponent},
                       {"residual", frontier.n_frontier.residual}};
    j["d_frontier"] = {{"multiplier", frontier.d_frontier.multiplier},
                       {"exponent", frontier.d_frontier.exponent},
                       {"residual", frontier.d_frontier.residual}};
    ordered_json rows = ordered_json::array();
    for (const auto& m : minima) {
        rows.push_back({{"budget_flops", m.budget_flops},
                        {"vertex_n_params", m.vertex_n_params},
                        {"vertex_loss", m.vertex_loss},
                        {"extrapolated", m.extrapolated}});
    }
    j["minima"] = rows;
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_fit(const std::string& runs_path, const std::string& law_name, double delta,
            const std::string& target, std::size_t max_starts, int max_descents,
            unsigned threads, const std::string& out) {
    const auto records = lawkit::parse_runs_file(runs_path);
    const auto law = lawkit::law_from_name(law_name);
    lawkit::FitOptions options;
    options.delta = delta;
    options.fit_val_loss = target == "val";
    options.max_starts = max_starts;
    options.max_descents = max_descents;
    options.threads = threads;
    lawkit::FitReport report;
    try {
        report = lawkit::fit_law(records, law, options);
    } catch (const lawkit::FitDivergence& e) {
        write_text(out, report_to_json(e.best).dump(2) + "\n");
        throw SolverFailure(e.what());
    }
    write_text(out, report_to_json(report).dump(2) + "\n");
    if (!report.converged) {
        std::cerr << "fit did not converge (objective " << report.objective_value << ")\n";
        return kExitSolver;
    }
    std::cerr << "fit objective " << report.objective_value << " over " << report.n_points
              << " runs\n";
    return kExitOk;
}

ordered_json allocation_to_json(const lawkit::ComputeAllocation& a) {
    ordered_json j;
    j["budget_flops"] = a.budget_flops;
    j["n_opt"] = a.n_opt;
    j["d_opt"] = a.d_opt;
    if (a.predicted_loss) j["predicted_loss"] = *a.predicted_loss;
    j["g_const"] = a.g_const;
    j["a_exp"] = a.a_exp;
    j["b_exp"] = a.b_exp;
    return j;
}

int run_allocate_compute(double flops, const std::string& coeffs,
                         const std::string& frontier, const std::string& out) {
    lawkit::ComputeAllocation alloc;
    if (!frontier.empty()) {
        alloc = lawkit::allocation_from_frontier(load_frontier(frontier), flops);
    } else {
        alloc = lawkit::closed_form_allocation(load_compute_coeffs(coeffs), flops);
    }
    write_text(out, allocation_to_json(alloc).dump(2) + "\n");
    return kExitOk;
}

int run_allocate_epochs(double n, double unique, const std::string& coeffs, double e_hi,
                        const std::string& out) {
    const auto law = load_data_coeffs(coeffs);
    lawkit::EpochAllocation alloc;
    try {
        alloc = lawkit::max_epochs(law, n, unique, {1.0, e_hi});
    } catch (const std::runtime_error& e) {
        throw SolverFailure(e.what());
    }
    ordered_json j;
    j["n_params"] = alloc.n_params;
    j["unique_tokens"] = alloc.unique_tokens;
    j["e_opt"] = alloc.e_opt;
    j["e_opt_floor"] = std::floor(alloc.e_opt);
    j["predicted_loss"] = alloc.predicted_loss;
    j["flops_at_opt"] = alloc.flops_at_opt;
    j["clamped_to_one"] = alloc.clamped_to_one;
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_allocate_joint(const std::string& unique_csv, const std::string& coeffs,
                       const std::string& format, const std::string& out) {
    const auto law = load_data_coeffs(coeffs);
    const auto budgets = parse_list(unique_csv, "unique");
    std::vector<lawkit::JointAllocation> allocs;
    for (double u : budgets) {
        allocs.push_back(lawkit::joint_optimum(law, u));
        if (allocs.back().on_boundary) {
            std::cerr << "warning: optimum at U=" << u << " sits on the search bounds\n";
        }
    }
    if (format == "csv") {
        std::ostringstream body;
        body << "unique_tokens,parameters,epochs,flops\n";
        for (const auto& a : allocs) {
            body << lawkit::csv::format_double(a.unique_tokens) << ','
                 << lawkit::csv::format_double(a.n_opt) << ','
                 << lawkit::csv::format_double(a.e_opt) << ','
                 << lawkit::csv::format_double(a.flops_at_opt) << '\n';
        }
        write_text(out, body.str());
        return kExitOk;
    }
    ordered_json rows = ordered_json::array();
    for (const auto& a : allocs) {
        ordered_json j;
        j["unique_tokens"] = a.unique_tokens;
        j["n_opt"] = a.n_opt;
        j["e_opt"] = a.e_opt;
        j["predicted_loss"] = a.predicted_loss;
        j["flops_at_opt"] = a.flops_at_opt;
        j["on_boundary"] = a.on_boundary;
        rows.push_back(j);
    }
    write_text(out, (rows.size() == 1 ? rows[0] : rows).dump(2) + "\n");
    return kExitOk;
}

int run_allocate_table(const std::string& params_csv, const std::string& coeffs,
                       const std::string& frontier, const std::string& format,
                       const std::string& out) {
    const auto params = parse_list(params_csv, "params");
    std::vector<lawkit::AllocationRow> rows;
    if (!coeffs.empty()) {
        rows = lawkit::allocation_table(load_compute_coeffs(coeffs), params);
    } else {
        rows = lawkit::allocation_table(
            load_frontier(frontier.empty() ? "paper-frontier" : frontier), params);
    }
    if (format == "json") {
        ordered_json j = ordered_json::array();
        for (const auto& r : rows) {
            j.push_back(
                {{"parameters", r.parameters}, {"flops", r.flops}, {"tokens", r.tokens}});
        }
        write_text(out, j.dump(2) + "\n");
    } else {
        std::ostringstream body;
        body << "parameters,flops,tokens\n";
        for (const auto& r : rows) {
            body << lawkit::csv::format_double(r.parameters) << ','
                 << lawkit::csv::format_double(r.flops) << ','
                 << lawkit::csv::format_double(r.tokens) << '\n';
        }
        write_text(out, body.str());
    }
    return kExitOk;
}

int run_allocate_contour(double unique, const std::string& coeffs, double n_lo, double n_hi,
                         double e_lo, double e_hi, int resolution, const std::string& out) {
    const auto law = load_data_coeffs(coeffs);
    const auto grid =
        lawkit::contour_grid(law, unique, {n_lo, n_hi}, {e_lo, e_hi}, resolution, resolution);
    std::ostringstream body;
    body << "n_params,epochs,predicted_loss\n";
    for (const auto& node : grid.nodes) {
        body << lawkit::csv::format_double(node.n_params) << ','
             << lawkit::csv::format_double(node.epochs) << ','
             << lawkit::csv::format_double(node.loss) << '\n';
    }
    write_text(out, body.str());
    std::cerr << "optimum: n=" << grid.optimum.n_opt << " e=" << grid.optimum.e_opt
              << " loss=" << grid.optimum.predicted_loss << "\n";
    return kExitOk;
}

int run_diffuse_corrupt(int vocab, int len, int count, double t, const std::string& kernel,
                        const std::string& source, std::uint64_t seed,
                        const std::string& out) {
    std::vector<lawkit::TokenSeq> batch;
    if (!source.empty()) {
        batch = load_corpus(source);
    } else {
        std::mt19937_64 rng(lawkit::derive_seed(seed, 0));
        std::uniform_int_distribution<int> draw(0, vocab - 1);
        batch.resize(count);
        for (auto& seq : batch) {
            seq.resize(len);
            for (auto& tok : seq) tok = draw(rng);
        }
    }
    const auto kern = kernel == "uniform" ? lawkit::Kernel::uniform : lawkit::Kernel::masked;
    const auto cb = lawkit::forward_corrupt(batch, t, lawkit::Schedule::linear(), kern,
                                            vocab, vocab, seed);
    ordered_json j;
    j["t"] = t;
    j["kernel"] = kernel;
    j["mask_id"] = cb.mask_id;
    j["original"] = cb.original;
    j["corrupted"] = cb.corrupted;
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_diffuse_loss(const std::string& source, const std::string& predictor_name,
                     const std::string& schedule_name, const std::string& loss_kind,
                     int vocab, int mc, std::uint64_t seed, const std::string& out) {
    const auto corpus = load_corpus(source);
    int max_token = 0;
    for (const auto& seq : corpus) {
        for (int tok : seq) max_token = std::max(max_token, tok);
    }
    const int vocab_size = vocab > 0 ? vocab : max_token + 1;
    const auto schedule = schedule_by_name(schedule_name);

    std::unique_ptr<lawkit::Predictor> predictor;
    if (predictor_name == "uniform") {
        predictor = std::make_unique<lawkit::UniformPredictor>(vocab_size);
    } else if (predictor_name == "ngram") {
        predictor = std::make_unique<lawkit::UnigramPredictor>(corpus, vocab_size);
    } else if (predictor_name == "copy") {
        predictor = std::make_unique<lawkit::CopyPredictor>(vocab_size);
    } else {
        throw std::runtime_error("unknown predictor '" + predictor_name +
                                 "' (uniform|ngram|copy)");
    }

    ordered_json j;
    j["schedule"] = schedule_name;
    j["predictor"] = predictor_name;
    j["mc_samples"] = mc;
    if (loss_kind == "elbo" || loss_kind == "maskgit") {
        const auto est =
            loss_kind == "elbo"
                ? lawkit::elbo_loss(corpus, *predictor, schedule, mc, seed, vocab_size)
                : lawkit::maskgit_loss(corpus, *predictor, schedule, mc, seed, vocab_size);
        j["loss"] = est.value;
        j["std_error"] = est.std_error;
        j["clamp_count"] = est.clamp_count;
    } else if (loss_kind == "uniform") {
        const auto est = lawkit::uniform_kernel_loss(corpus, *predictor, schedule, mc, seed,
                                                     vocab_size);
        j["noisy_loss"] = est.noisy.value;
        j["noisy_std_error"] = est.noisy.std_error;
        j["clean_loss"] = est.clean.value;
        j["clean_std_error"] = est.clean.std_error;
    } else {
        throw std::runtime_error("unknown loss '" + loss_kind + "' (elbo|maskgit|uniform)");
    }
    write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int run_diffuse_schedule(const std::string& kind, int grid, const std::string& out) {
    const auto schedule = schedule_by_name(kind);
    std::ostringstream body;
    body << "t,alpha,weight\n";
    for (int i = 1; i <= grid; ++i) {
        const double t = static_cast<double>(i) / grid;
        body << lawkit::csv::format_double(t) << ','
             << lawkit::csv::format_double(schedule.alpha(t)) << ','
             << lawkit::csv::format_double(schedule.weight(t)) << '\n';
    }
    write_text(out, body.str());
    return kExitOk;
}

int run_synth(const std::string& law_name, const std::string& coeffs, double sigma,
              std::uint64_t seed, const std::string& n_grid, const std::string& d_grid,
              const std::string& u_grid, const std::string& e_grid,
              const std::string& out) {
    lawkit::SynthSpec spec;
    spec.law = lawkit::law_from_name(law_name);
    spec.sigma = sigma;
    spec.seed = seed;
    spec.n_grid = parse_grid(n_grid, "--n-grid");
    if (spec.law == lawkit::LawKind::compute) {
        spec.d_grid = parse_grid(d_grid, "--d-grid");
        spec.coefficients = lawkit::flatten(load_compute_coeffs(coeffs));
    } else {
        spec.u_grid = parse_grid(u_grid, "--u-grid");
        spec.e_grid = parse_grid(e_grid, "--e-grid");
        if (spec.law == lawkit::LawKind::data) {
            spec.coefficients = lawkit::flatten(load_data_coeffs(coeffs));
        } else {
            const auto set = lawkit::builtin_coefficients(
                coeffs == "paper" ? (spec.law == lawkit::LawKind::alt1 ? "paper-alt1"
                                                                       : "paper-alt2")
                                  : coeffs);
            if (spec.law == lawkit::LawKind::alt1 && set.alt1) {
                spec.coefficients = lawkit::flatten(*set.alt1);
            } else if (spec.law == lawkit::LawKind::alt2 && set.alt2) {
                spec.coefficients = lawkit::flatten(*set.alt2);
            } else {
                throw std::runtime_error("'" + coeffs + "' does not match law " + law_name);
            }
        }
    }
    const auto records = lawkit::synth_runs(spec);
    std::ostringstream body;
    lawkit::serialize_runs(records, body, lawkit::RunFormat::csv);
    write_text(out, body.str());
    std::cerr << "wrote " << records.size() << " synthetic runs\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"scaling-law analysis toolkit for diffusion language models"};
    app.require_subcommand(1);

    // ingest
    std::string in_runs, in_out, in_to = "csv";
    auto* ingest = app.add_subcommand("ingest", "validate and normalize a run log");
    ingest->add_option("--runs", in_runs, "run log (.csv or .jsonl)")->required();
    ingest->add_option("--out", in_out, "output path (default stdout)");
    ingest->add_option("--to", in_to, "output format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));

    // smooth
    std::string sm_series, sm_out;
    int sm_window = 301, sm_width = 3;
    bool sm_truncate = false;
    auto* smooth = app.add_subcommand("smooth", "Gaussian-smooth loss series");
    smooth->add_option("--series", sm_series, "loss-series CSV (run_id,step,loss)")
        ->required();
    smooth->add_option("--window", sm_window, "odd window size (default 301)");
    smooth->add_flag("--truncate-overfit", sm_truncate,
                     "cut each series at its first sustained rise before smoothing");
    smooth->add_option("--overfit-width", sm_width, "rise width for the cut (default 3)");
    smooth->add_option("--out", sm_out, "output path (default stdout)");

    // isoflop
    std::string iso_runs, iso_budgets, iso_out;
    double iso_tol = 0.05;
    bool iso_extrap = false;
    auto* iso = app.add_subcommand("isoflop",
                                   "per-budget parabola minima and the power-law frontier");
    iso->add_option("--runs", iso_runs, "run log")->required();
    iso->add_option("--budgets", iso_budgets, "comma-separated FLOPs budgets")->required();
    iso->add_option("--tol", iso_tol, "relative budget tolerance (default 0.05)");
    iso->add_flag("--include-extrapolated", iso_extrap,
                  "keep vertices outside their sampled range");
    iso->add_option("--out", iso_out, "frontier.json path (default stdout)");

    // fit
    std::string fit_runs, fit_law = "compute", fit_target = "train", fit_out;
    double fit_delta = 1e-3;
    std::size_t fit_max_starts = 10000;
    int fit_max_descents = 64;
    unsigned fit_threads = 0;
    auto* fit = app.add_subcommand("fit", "Huber fit of a parametric loss law");
    fit->add_option("--runs", fit_runs, "run log")->required();
    fit->add_option("--law", fit_law, "compute|data|alt1|alt2")
        ->check(CLI::IsMember({"compute", "data", "alt1", "alt2"}));
    fit->add_option("--delta", fit_delta, "Huber knee (default 1e-3)");
    fit->add_option("--target", fit_target, "fit train or val losses")
        ->check(CLI::IsMember({"train", "val"}));
    fit->add_option("--max-starts", fit_max_starts, "initialization grid cap");
    fit->add_option("--max-descents", fit_max_descents,
                    "full descents from the best-ranked starts");
    fit->add_option("--threads", fit_threads, "worker threads (0 = hardware)");
    fit->add_option("--out", fit_out, "fit.json path (default stdout)");

    // allocate
    auto* alloc = app.add_subcommand("allocate", "optimal allocation solvers");
    alloc->require_subcommand(1);

    double ac_flops = 0.0;
    std::string ac_coeffs = "paper-compute", ac_frontier, ac_out;
    auto* ac = alloc->add_subcommand("compute", "optimal (N, D) for a FLOPs budget");
    ac->add_option("--flops", ac_flops, "compute budget")->required();
    ac->add_option("--coeffs", ac_coeffs, "law coefficients: builtin name or fit.json");
    ac->add_option("--frontier", ac_frontier,
                   "use a fitted frontier instead (name or frontier.json)");
    ac->add_option("--out", ac_out, "output path (default stdout)");

    double ae_n = 0.0, ae_unique = 0.0, ae_ehi = 1e6;
    std::string ae_coeffs = "paper-data", ae_out;
    auto* ae = alloc->add_subcommand("epochs", "max useful epochs at fixed (N, U_D)");
    ae->add_option("--n", ae_n, "model parameters")->required();
    ae->add_option("--unique", ae_unique, "unique tokens")->required();
    ae->add_option("--coeffs", ae_coeffs, "data-law coefficients (builtin or fit.json)");
    ae->add_option("--e-hi", ae_ehi, "upper epoch bound (default 1e6)");
    ae->add_option("--out", ae_out, "output path (default stdout)");

    std::string aj_unique, aj_coeffs = "paper-data", aj_format = "json", aj_out;
    auto* aj = alloc->add_subcommand("joint", "optimal (N, e) per unique-token budget");
    aj->add_option("--unique", aj_unique, "unique tokens (comma list allowed)")->required();
    aj->add_option("--coeffs", aj_coeffs, "data-law coefficients (builtin or fit.json)");
    aj->add_option("--format", aj_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    aj->add_option("--out", aj_out, "output path (default stdout)");

    std::string at_params, at_coeffs, at_frontier, at_format = "csv", at_out;
    auto* at = alloc->add_subcommand("table", "frontier allocation table per model size");
    at->add_option("--params", at_params, "comma-separated parameter counts")->required();
    at->add_option("--coeffs", at_coeffs, "closed-form route: law coefficients");
    at->add_option("--frontier", at_frontier, "frontier route (default paper-frontier)");
    at->add_option("--format", at_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    at->add_option("--out", at_out, "output path (default stdout)");

    double ag_unique = 0.0, ag_nlo = 1e6, ag_nhi = 1e13, ag_elo = 1.0, ag_ehi = 1e6;
    int ag_res = 64;
    std::string ag_coeffs = "paper-data", ag_out;
    auto* ag = alloc->add_subcommand("contour", "loss grid over (N, e) at fixed U_D");
    ag->add_option("--unique", ag_unique, "unique tokens")->required();
    ag->add_option("--coeffs", ag_coeffs, "data-law coefficients (builtin or fit.json)");
    ag->add_option("--n-lo", ag_nlo, "lower N bound");
    ag->add_option("--n-hi", ag_nhi, "upper N bound");
    ag->add_option("--e-lo", ag_elo, "lower epoch bound");
    ag->add_option("--e-hi", ag_ehi, "upper epoch bound");
    ag->add_option("--resolution", ag_res, "grid resolution per axis (default 64)");
    ag->add_option("--out", ag_out, "grid.csv path (default stdout)");

    // diffuse
    auto* diffuse = app.add_subcommand("diffuse", "masked-diffusion math");
    diffuse->require_subcommand(1);

    int dc_vocab = 4, dc_len = 8, dc_count = 1;
    double dc_t = 0.5;
    std::string dc_kernel = "masked", dc_source, dc_out;
    std::uint64_t dc_seed = 0;
    auto* dc = diffuse->add_subcommand("corrupt", "forward-corrupt token sequences");
    dc->add_option("--vocab", dc_vocab, "vocabulary size");
    dc->add_option("--len", dc_len, "sequence length for generated input");
    dc->add_option("--count", dc_count, "number of generated sequences");
    dc->add_option("--t", dc_t, "noise level in [0, 1]")->required();
    dc->add_option("--kernel", dc_kernel, "masked|uniform")
        ->check(CLI::IsMember({"masked", "uniform"}));
    dc->add_option("--source", dc_source, "optional corpus CSV instead of random input");
    dc->add_option("--seed", dc_seed, "RNG seed");
    dc->add_option("--out", dc_out, "output path (default stdout)");

    std::string dl_source, dl_predictor = "ngram", dl_schedule = "linear", dl_loss = "elbo",
                dl_out;
    int dl_vocab = 0, dl_mc = 10000;
    std::uint64_t dl_seed = 0;
    auto* dl = diffuse->add_subcommand("loss", "Monte Carlo loss estimates on a corpus");
    dl->add_option("--source", dl_source, "corpus CSV, one token-id sequence per row")
        ->required();
    dl->add_option("--predictor", dl_predictor, "uniform|ngram|copy");
    dl->add_option("--schedule", dl_schedule, "linear|poly2|cosine");
    dl->add_option("--loss", dl_loss, "elbo|maskgit|uniform");
    dl->add_option("--vocab", dl_vocab, "vocabulary size (default: max token + 1)");
    dl->add_option("--mc", dl_mc, "Monte Carlo replicates (default 10000)");
    dl->add_option("--seed", dl_seed, "RNG seed");
    dl->add_option("--out", dl_out, "output path (default stdout)");

    std::string ds_kind = "linear", ds_out;
    int ds_grid = 100;
    auto* ds = diffuse->add_subcommand("schedule", "tabulate alpha(t) and weight(t)");
    ds->add_option("--kind", ds_kind, "linear|poly2|cosine");
    ds->add_option("--grid", ds_grid, "number of grid points over (0, 1]");
    ds->add_option("--out", ds_out, "alpha.csv path (default stdout)");

    // synth
    std::string sy_law = "compute", sy_coeffs = "paper", sy_out;
    std::string sy_ngrid = "1e7:1e10:10", sy_dgrid = "1e9:1e12:10", sy_ugrid = "1e8:1e11:8",
                sy_egrid = "1:1e4:16";
    double sy_sigma = 0.0;
    std::uint64_t sy_seed = 0;
    auto* synth = app.add_subcommand("synth", "generate synthetic run logs from a law");
    synth->add_option("--law", sy_law, "compute|data|alt1|alt2")
        ->check(CLI::IsMember({"compute", "data", "alt1", "alt2"}));
    synth->add_option("--coeffs", sy_coeffs, "builtin name or fit.json");
    synth->add_option("--sigma", sy_sigma, "log-normal noise level (default 0)");
    synth->add_option("--seed", sy_seed, "RNG seed");
    synth->add_option("--n-grid", sy_ngrid, "N grid lo:hi:count");
    synth->add_option("--d-grid", sy_dgrid, "D grid lo:hi:count (compute law)");
    synth->add_option("--u-grid", sy_ugrid, "U_D grid lo:hi:count (data laws)");
    synth->add_option("--e-grid", sy_egrid, "epoch grid lo:hi:count (data laws)");
    synth->add_option("--out", sy_out, "runs CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*ingest) return run_ingest(in_runs, in_out, in_to);
        if (*smooth) return run_smooth(sm_series, sm_window, sm_truncate, sm_width, sm_out);
        if (*iso) return run_isoflop(iso_runs, iso_budgets, iso_tol, iso_extrap, iso_out);
        if (*fit) {
            return run_fit(fit_runs, fit_law, fit_delta, fit_target, fit_max_starts,
                           fit_max_descents, fit_threads, fit_out);
        }
        if (*ac) return run_allocate_compute(ac_flops, ac_coeffs, ac_frontier, ac_out);
        if (*ae) return run_allocate_epochs(ae_n, ae_unique, ae_coeffs, ae_ehi, ae_out);
        if (*aj) return run_allocate_joint(aj_unique, aj_coeffs, aj_format, aj_out);
        if (*at) {
            return run_allocate_table(at_params, at_coeffs, at_frontier, at_format, at_out);
        }
        if (*ag) {
            return run_allocate_contour(ag_unique, ag_coeffs, ag_nlo, ag_nhi, ag_elo, ag_ehi,
                                        ag_res, ag_out);
        }
        if (*dc) {
            return run_diffuse_corrupt(dc_vocab, dc_len, dc_count, dc_t, dc_kernel, dc_source,
                                       dc_seed, dc_out);
        }
        if (*dl) {
            return run_diffuse_loss(dl_source, dl_predictor, dl_schedule, dl_loss, dl_vocab,
                                    dl_mc, dl_seed, dl_out);
        }
        if (*ds) return run_diffuse_schedule(ds_kind, ds_grid, ds_out);
        if (*synth) {
            return run_synth(sy_law, sy_coeffs, sy_sigma, sy_seed, sy_ngrid, sy_dgrid,
                             sy_ugrid, sy_egrid, sy_out);
        }
    } catch (const SolverFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    std::cerr << "error: no subcommand\n";
    return kExitInput;
}
