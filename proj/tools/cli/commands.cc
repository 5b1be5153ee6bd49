#include "cli/commands.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cli/manifest.h"
#include "driftqec/architecture.h"
#include "driftqec/code_model.h"
#include "driftqec/errors.h"
#include "driftqec/experiment_config.h"
#include "driftqec/oracle.h"
#include "driftqec/predictor.h"
#include "driftqec/spatial.h"
#include "driftqec/trace_io.h"

namespace driftqec::cli {

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
    const char *env = std::getenv("DRIFTQEC_OUT_DIR");
    return env && *env ? std::string(env) : std::string("driftqec_out");
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open {}", path));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

using Clock = std::chrono::steady_clock;

/// Collects outputs in memory and writes them, plus the manifest, at the end.
struct Outputs {
    RunManifest manifest;
    std::vector<std::pair<std::string, std::string>> files;
    Clock::time_point start = Clock::now();

    void add(std::string name, std::string contents) {
        manifest.outputs.push_back(name);
        files.emplace_back(std::move(name), std::move(contents));
    }

    void commit() {
        const fs::path dir(manifest.output_dir);
        for (const auto &[name, contents] : files) {
            write_file_atomic(dir, name, contents);
        }
        manifest.runtime_s = std::chrono::duration<double>(Clock::now() - start).count();
        manifest.tool_version = tool_version();
        write_file_atomic(dir, "manifest.json", manifest_json(manifest));
    }
};

std::string fmt_opt(const std::optional<std::int64_t> &v) {
    return v ? std::to_string(*v) : std::string();
}

// oracle ---------------------------------------------------------------------

struct OracleArgs {
    int d = 3;
    std::string p_grid = "1e-3:3e-2:8";
    std::uint64_t shots = 100'000;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out = default_out_dir();
};

int cmd_oracle(const OracleArgs &a, std::ostream &out) {
    check_distance(a.d);
    Outputs o;
    o.manifest.subcommand = "oracle";
    o.manifest.seed = a.seed;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"d", std::to_string(a.d)},
                            {"p", a.p_grid},
                            {"shots", std::to_string(a.shots)},
                            {"threads", std::to_string(a.threads)}};
    const auto grid = parse_log_grid(a.p_grid);
    FitDataset data = generate_fit_dataset(a.d, grid, a.shots, a.seed, a.threads);
    std::ostringstream csv;
    write_dataset_csv(csv, data);
    o.add("dataset.csv", csv.str());
    o.commit();
    out << fmt::format("wrote {} rows to {}\n", data.rows.size(), (fs::path(a.out) / "dataset.csv").string());
    for (double p : data.dropped_p) {
        out << fmt::format("dropped p = {:.4g}: no logical errors observed\n", p);
    }
    return kExitOk;
}

// fit ------------------------------------------------------------------------

struct FitArgs {
    std::string dataset;
    int d = 3;
    std::string out = default_out_dir();
};

int cmd_fit(const FitArgs &a, std::ostream &out) {
    check_distance(a.d);
    Outputs o;
    o.manifest.subcommand = "fit";
    o.manifest.config_path = a.dataset;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"dataset", a.dataset}, {"d", std::to_string(a.d)}};
    std::istringstream in(slurp(a.dataset));
    const PowerLawFit fit = fit_power_law(read_dataset_samples(in), a.d);
    o.add("fit.json", fit_to_json(fit));
    o.commit();
    out << fmt::format("b = {:.4f} +- {:.4f}, log_A = {:.4f} +- {:.4f}, residual_rms = {:.3g}\n", fit.b, fit.sigma_b,
                       fit.log_A, fit.sigma_logA, fit.residual_rms);
    return kExitOk;
}

// simulate / sweep -----------------------------------------------------------

ExperimentConfig load_with_overrides(const std::string &path, std::optional<std::uint64_t> seed) {
    std::string text = slurp(path);
    if (seed) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError(fmt::format("malformed experiment config: {}", e.what()));
        }
        j["seed"] = *seed;
        text = j.dump();
    }
    const fs::path p(path);
    return parse_experiment_config(text, p.has_parent_path() ? p.parent_path().string() : ".");
}

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> total_cycles;
    std::optional<std::uint64_t> seed;
    bool cycles_csv = true;
    std::string out = default_out_dir();
};

int cmd_simulate(const SimulateArgs &a, std::ostream &out) {
    ExperimentConfig cfg = load_with_overrides(a.config, a.seed);
    if (a.total_cycles) {
        cfg.total_cycles = *a.total_cycles;
        cfg.validate();
    }
    Outputs o;
    o.manifest.subcommand = "simulate";
    o.manifest.config_path = a.config;
    o.manifest.seed = cfg.seed;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"config", a.config}, {"total_cycles", std::to_string(cfg.total_cycles)}};
    const ExperimentReport report = run_memory_experiment(cfg);
    std::ostringstream json;
    write_report_json(json, report, cfg);
    o.add("report.json", json.str());
    if (a.cycles_csv) {
        std::ostringstream csv;
        write_cycle_csv(csv, report);
        o.add("cycles.csv", csv.str());
    }
    o.commit();
    const auto &m = report.metrics;
    out << fmt::format("{}: {} cycles, cycles_above_target = {}, remaps = {}, deferrals = {}, mean L1 = {:.3g}\n",
                       cfg.name, cfg.total_cycles, m.cycles_above_target, m.remap_count, m.deferral_count, m.mean_l1);
    return kExitOk;
}

struct SweepArgs {
    std::string config;
    std::string axis;
    std::vector<double> values;
    int tile = 0;
    int replicates = 1;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::string out = default_out_dir();
};

struct SweepRow {
    double value = 0.0;
    int replicate = 0;
    double mean_l1 = std::nan("");
    std::uint64_t valid_cycles = 0;
    BreachReport gap;
};

int cmd_sweep(const SweepArgs &a, std::ostream &out) {
    if (a.axis != "buffer_k" && a.axis != "alpha" && a.axis != "multiplier") {
        throw ConfigError(fmt::format("unknown sweep axis '{}' (buffer_k, alpha or multiplier)", a.axis));
    }
    if (a.values.size() < 2) {
        throw ConfigError("a sweep needs at least two values");
    }
    if (a.replicates < 1) {
        throw ConfigError("replicates must be at least 1");
    }
    const ExperimentConfig cfg = load_with_overrides(a.config, a.seed);
    if (a.tile < 0 || a.tile >= cfg.tile_count()) {
        throw ConfigError(fmt::format("tile {} outside the grid", a.tile));
    }
    std::vector<PredictorConfig> configs;
    for (double v : a.values) {
        PredictorConfig pc = cfg.predictor;
        if (a.axis == "buffer_k") {
            if (v < 1 || v != std::floor(v) || v > 4e9) {
                throw ConfigError(fmt::format("buffer size must be a positive integer (got {})", v));
            }
            pc.k = static_cast<std::uint32_t>(v);
        } else if (a.axis == "alpha") {
            pc.alpha = v;
        } else {
            pc.multiplier = v;
        }
        pc.validate();
        configs.push_back(pc);
    }
    const TileTrace &tt = cfg.traces[static_cast<std::size_t>(a.tile)];
    const std::vector<double> truth = per_cycle_truth(*tt.trace, cfg.cycle_time(), cfg.total_cycles, tt.offset_cycles);

    std::vector<SweepRow> rows(configs.size() * static_cast<std::size_t>(a.replicates));
    auto work = [&](std::size_t i) {
        const std::size_t vi = i / static_cast<std::size_t>(a.replicates);
        const int r = static_cast<int>(i % static_cast<std::size_t>(a.replicates));
        // Same seed for every value of the axis: common random numbers.
        const SingleTileRun run = run_single_tile(truth, cfg.fit, configs[vi], derive_seed(cfg.seed, "sweep.run", r));
        SweepRow row;
        row.value = a.values[vi];
        row.replicate = r;
        for (const auto &p : run.predictions) {
            row.valid_cycles += p.valid ? 1 : 0;
        }
        if (row.valid_cycles > 0) {
            row.mean_l1 = evaluate_l1(run.truth, run.predictions);
        }
        row.gap = breach_gap(run.truth, run.predictions, configs[vi].target_ler);
        rows[i] = row;
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(a.threads, static_cast<unsigned>(rows.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < rows.size(); i++) {
            work(i);
        }
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; w++) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < rows.size(); i += workers) {
                    work(i);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    std::string csv = "axis,value,replicate,mean_l1,valid_cycles,predicted_breach_cycle,true_breach_cycle,gap,zealous\n";
    for (const auto &r : rows) {
        csv += fmt::format("{},{:.10g},{},{},{},{},{},{},{}\n", a.axis, r.value, r.replicate,
                           std::isnan(r.mean_l1) ? std::string() : fmt::format("{:.10g}", r.mean_l1), r.valid_cycles,
                           fmt_opt(r.gap.predicted_breach_cycle), fmt_opt(r.gap.true_breach_cycle), fmt_opt(r.gap.gap),
                           r.gap.zealous ? 1 : 0);
    }
    Outputs o;
    o.manifest.subcommand = "sweep";
    o.manifest.config_path = a.config;
    o.manifest.seed = cfg.seed;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"config", a.config},
                            {"axis", a.axis},
                            {"tile", std::to_string(a.tile)},
                            {"replicates", std::to_string(a.replicates)}};
    o.add("sweep.csv", csv);
    o.commit();
    out << fmt::format("wrote {} sweep rows to {}\n", rows.size(), (fs::path(a.out) / "sweep.csv").string());
    return kExitOk;
}

// spatial --------------------------------------------------------------------

struct SpatialArgs {
    int delta = 2;
    std::vector<int> d_list;
    std::int64_t n_qubits = 1000;
    std::string out = default_out_dir();
};

int cmd_spatial(const SpatialArgs &a, std::ostream &out) {
    const auto rows = spatial::crossover_report(a.delta, a.d_list, a.n_qubits);
    for (const auto &r : rows) {
        if (!spatial::break_even_holds(r.d, r.delta, r.ratio)) {
            throw NumericalError(fmt::format("break-even identity failed at d = {}", r.d));
        }
    }
    std::ostringstream csv;
    spatial::write_crossover_csv(csv, rows);
    Outputs o;
    o.manifest.subcommand = "spatial";
    o.manifest.output_dir = a.out;
    std::string ds;
    for (int d : a.d_list) {
        ds += (ds.empty() ? "" : ",") + std::to_string(d);
    }
    o.manifest.arguments = {{"delta", std::to_string(a.delta)}, {"d", ds}, {"n_qubits", std::to_string(a.n_qubits)}};
    o.add("crossover.csv", csv.str());
    o.commit();
    for (const auto &r : rows) {
        out << fmt::format("d = {}: M/N = {}/{}, max M = {}{}\n", r.d, r.ratio.numerator(), r.ratio.denominator(),
                           r.max_m, r.efficient ? " (efficient)" : "");
    }
    return kExitOk;
}

// predict --------------------------------------------------------------------

struct PredictArgs {
    std::string fit;
    std::string dfr_trace;
    PredictorConfig predictor;
    double round_time = 1.1e-6;
    std::string out = default_out_dir();
};

int cmd_predict(const PredictArgs &a, std::ostream &out) {
    a.predictor.validate();
    const PowerLawFit fit = fit_from_json(slurp(a.fit));
    std::istringstream in(slurp(a.dfr_trace));
    const DfrTrace trace = read_dfr_trace_csv(in, fit.d * a.round_time);
    DfrBuffer buffer(a.predictor.k);
    std::ostringstream log;
    write_prediction_log_header(log);
    std::uint64_t breaches = 0;
    std::uint64_t cycle = 0;
    for (const auto &s : trace.samples) {
        cycle++;
        const Prediction p = predict_tile(buffer, fit, a.predictor);
        breaches += detect_breach(p, a.predictor.target_ler) ? 1 : 0;
        write_prediction_log_row(log, cycle, 0, p, a.predictor.target_ler);
        buffer.push(s.dfr);
    }
    Outputs o;
    o.manifest.subcommand = "predict";
    o.manifest.config_path = a.dfr_trace;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"fit", a.fit},
                            {"trace", a.dfr_trace},
                            {"k", std::to_string(a.predictor.k)},
                            {"alpha", fmt::format("{}", a.predictor.alpha)},
                            {"multiplier", fmt::format("{}", a.predictor.multiplier)},
                            {"target", fmt::format("{}", a.predictor.target_ler)}};
    o.add("predictions.csv", log.str());
    o.commit();
    out << fmt::format("{} samples, {} breach cycles\n", cycle, breaches);
    return kExitOk;
}

// import-trace ---------------------------------------------------------------

struct ImportArgs {
    std::string rounds;
    double round_time = 1.1e-6;
    double max_rel_uncertainty = 0.1;
    std::string out = default_out_dir();
};

int cmd_import(const ImportArgs &a, std::ostream &out) {
    const auto rounds = read_round_counts_file(a.rounds);
    const DfrTrace trace = import_dfr_trace(rounds, a.round_time, a.max_rel_uncertainty);
    std::ostringstream csv;
    write_dfr_trace_csv(csv, trace);
    Outputs o;
    o.manifest.subcommand = "import-trace";
    o.manifest.config_path = a.rounds;
    o.manifest.output_dir = a.out;
    o.manifest.arguments = {{"rounds", a.rounds},
                            {"round_time", fmt::format("{}", a.round_time)},
                            {"max_rel_uncertainty", fmt::format("{}", a.max_rel_uncertainty)}};
    o.add("dfr_trace.csv", csv.str());
    o.commit();
    out << fmt::format("{} rounds -> {} samples (window >= {} rounds)\n", rounds.size(), trace.samples.size(),
                       trace.window_size);
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Drift-aware surface code simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version());

    OracleArgs oracle;
    auto *c_oracle = app.add_subcommand("oracle", "Sample a DFR/LER dataset for the power-law fit");
    c_oracle->add_option("--d", oracle.d, "Code distance (odd, 3..7)");
    c_oracle->add_option("--p", oracle.p_grid, "Physical error grid, lo:hi:n or a comma list");
    c_oracle->add_option("--shots", oracle.shots, "Shots per grid point");
    c_oracle->add_option("--seed", oracle.seed, "Root seed");
    c_oracle->add_option("--threads", oracle.threads, "Worker threads");
    c_oracle->add_option("--out", oracle.out, "Output directory");

    FitArgs fit;
    auto *c_fit = app.add_subcommand("fit", "Fit log10 LER = log_A + b log10 DFR");
    c_fit->add_option("--dataset", fit.dataset, "Dataset CSV from `oracle`")->required();
    c_fit->add_option("--d", fit.d, "Code distance of the dataset");
    c_fit->add_option("--out", fit.out, "Output directory");

    SimulateArgs sim;
    auto *c_sim = app.add_subcommand("simulate", "Run a memory experiment on a tile grid");
    c_sim->add_option("--config", sim.config, "Experiment config JSON")->required();
    c_sim->add_option("--total-cycles", sim.total_cycles, "Override the number of cycles");
    c_sim->add_option("--seed", sim.seed, "Override the root seed");
    c_sim->add_flag("!--no-cycles-csv", sim.cycles_csv, "Skip the per-cycle CSV");
    c_sim->add_option("--out", sim.out, "Output directory");

    SweepArgs sweep;
    auto *c_sweep = app.add_subcommand("sweep", "Sweep one predictor parameter on a single tile");
    c_sweep->add_option("--config", sweep.config, "Experiment config JSON")->required();
    c_sweep->add_option("--axis", sweep.axis, "buffer_k, alpha or multiplier")->required();
    c_sweep->add_option("--values", sweep.values, "Comma-separated values")->delimiter(',')->required();
    c_sweep->add_option("--tile", sweep.tile, "Tile whose truth trace is used");
    c_sweep->add_option("--replicates", sweep.replicates, "Independent DFR realizations per value");
    c_sweep->add_option("--threads", sweep.threads, "Worker threads");
    c_sweep->add_option("--seed", sweep.seed, "Override the root seed");
    c_sweep->add_option("--out", sweep.out, "Output directory");

    SpatialArgs spatial_args;
    auto *c_spatial = app.add_subcommand("spatial", "Reloqation versus code-deformation qubit accounting");
    c_spatial->add_option("--delta", spatial_args.delta, "Routing distance surplus");
    c_spatial->add_option("--d", spatial_args.d_list, "Comma-separated distances")->delimiter(',');
    c_spatial->add_option("--n-qubits", spatial_args.n_qubits, "Logical qubits");
    c_spatial->add_option("--out", spatial_args.out, "Output directory");

    PredictArgs predict;
    auto *c_predict = app.add_subcommand("predict", "Replay a DFR trace through the predictor");
    c_predict->add_option("--fit", predict.fit, "Fit JSON")->required();
    c_predict->add_option("--trace", predict.dfr_trace, "DFR trace CSV, one sample per cycle")->required();
    c_predict->add_option("--k", predict.predictor.k, "Buffer size");
    c_predict->add_option("--alpha", predict.predictor.alpha, "Significance level");
    c_predict->add_option("--multiplier", predict.predictor.multiplier, "Interval multiplier in [-1, 1]");
    c_predict->add_option("--target", predict.predictor.target_ler, "Target LER");
    c_predict->add_option("--round-time", predict.round_time, "Seconds per round");
    c_predict->add_option("--out", predict.out, "Output directory");

    ImportArgs import;
    auto *c_import = app.add_subcommand("import-trace", "Window per-round detector counts into a DFR trace");
    c_import->add_option("--rounds", import.rounds, "Round-count CSV or binary file")->required();
    c_import->add_option("--round-time", import.round_time, "Seconds per round");
    c_import->add_option("--max-rel-uncertainty", import.max_rel_uncertainty, "Bound on stderr / mean per window");
    c_import->add_option("--out", import.out, "Output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion &) {
        out << tool_version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        // Subcommand help lands here as CallForHelp thrown from the child.
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (c_oracle->parsed()) {
            return cmd_oracle(oracle, out);
        }
        if (c_fit->parsed()) {
            return cmd_fit(fit, out);
        }
        if (c_sim->parsed()) {
            return cmd_simulate(sim, out);
        }
        if (c_sweep->parsed()) {
            return cmd_sweep(sweep, out);
        }
        if (c_spatial->parsed()) {
            return cmd_spatial(spatial_args, out);
        }
        if (c_predict->parsed()) {
            return cmd_predict(predict, out);
        }
        if (c_import->parsed()) {
            return cmd_import(import, out);
        }
    } catch (const ConfigError &e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError &e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitConfig;
}

}  // namespace driftqec::cli
