#include "driftqec/experiment_config.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "driftqec/errors.h"
#include "driftqec/oracle.h"
#include "driftqec/trace_io.h"

namespace driftqec {

namespace {

using nlohmann::json;

void expect_keys(const json &obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) {
        throw ConfigError(fmt::format("{} must be a JSON object", where));
    }
    for (const auto &item : obj.items()) {
        bool known = false;
        for (auto k : allowed) {
            known = known || item.key() == k;
        }
        if (!known) {
            throw ConfigError(fmt::format("unknown key '{}' in {}", item.key(), where));
        }
    }
}

template <typename T>
T get_or(const json &obj, const char *key, T fallback) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

template <typename T>
T require(const json &obj, const char *key, std::string_view where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(fmt::format("missing '{}' in {}", key, where));
    }
    try {
        return it->get<T>();
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
    }
}

std::string read_text(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(fmt::format("cannot open {}", path.string()));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path resolve(const std::string &base_dir, const std::string &p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : std::filesystem::path(base_dir) / path;
}

PowerLawFit parse_fit(const json &j, int d, std::uint64_t seed, const std::string &base_dir) {
    const auto source = require<std::string>(j, "source", "fit");
    if (source == "inline") {
        expect_keys(j, "fit", {"source", "log_A", "b", "sigma_logA", "sigma_b"});
        PowerLawFit fit;
        fit.d = d;
        fit.log_A = require<double>(j, "log_A", "fit");
        fit.b = require<double>(j, "b", "fit");
        fit.sigma_logA = get_or<double>(j, "sigma_logA", 0.0);
        fit.sigma_b = get_or<double>(j, "sigma_b", 0.0);
        return fit;
    }
    if (source == "file") {
        expect_keys(j, "fit", {"source", "path"});
        return fit_from_json(read_text(resolve(base_dir, require<std::string>(j, "path", "fit"))));
    }
    if (source == "oracle") {
        expect_keys(j, "fit", {"source", "p_grid", "shots", "seed", "threads"});
        auto grid = parse_log_grid(get_or<std::string>(j, "p_grid", "1e-3:5e-2:10"));
        auto shots = get_or<std::uint64_t>(j, "shots", 100'000);
        auto fit_seed = get_or<std::uint64_t>(j, "seed", derive_seed(seed, "config.fit", 0));
        auto threads = get_or<unsigned>(j, "threads", 1);
        FitDataset data = generate_fit_dataset(d, grid, shots, fit_seed, threads);
        std::vector<std::pair<double, double>> samples;
        for (const auto &row : data.rows) {
            samples.emplace_back(row.batch.dfr, row.batch.ler);
        }
        return fit_power_law(samples, d);
    }
    throw ConfigError(fmt::format("unknown fit source '{}'", source));
}

double fit_ler(const PowerLawFit &fit, double dfr) {
    double v = std::pow(10.0, fit.log_A + fit.b * std::log10(std::max(dfr, std::numeric_limits<double>::min())));
    return std::clamp(v, std::numeric_limits<double>::min(), 1.0);
}

LerTrace ler_from_dfr(const DfrTrace &dfr, const PowerLawFit &fit) {
    std::vector<LerSample> out;
    out.reserve(dfr.samples.size() + 1);
    for (const auto &s : dfr.samples) {
        out.push_back({s.time, fit_ler(fit, s.dfr)});
    }
    return LerTrace(std::move(out));
}

std::vector<BurstEvent> parse_bursts(const json &arr, const std::vector<ComponentId> &components) {
    std::vector<BurstEvent> bursts;
    if (arr.is_null()) {
        return bursts;
    }
    if (!arr.is_array()) {
        throw ConfigError("bursts must be an array");
    }
    for (const auto &b : arr) {
        expect_keys(b, "burst", {"start_s", "duration_s", "magnitude", "recovery_s", "channels"});
        BurstEvent ev;
        ev.start = require<double>(b, "start_s", "burst");
        ev.duration = require<double>(b, "duration_s", "burst");
        ev.magnitude = require<double>(b, "magnitude", "burst");
        ev.recovery_constant = get_or<double>(b, "recovery_s", 1.0);
        std::set<std::string> channels;
        if (b.contains("channels")) {
            for (const auto &c : b.at("channels")) {
                channels.insert(c.get<std::string>());
            }
        }
        for (const auto &c : components) {
            if (channels.empty() || channels.contains(std::string(channel_name(c.channel)))) {
                ev.affected.insert(c);
            }
        }
        if (ev.affected.empty()) {
            throw ConfigError("burst affects no component");
        }
        ev.validate();
        bursts.push_back(std::move(ev));
    }
    return bursts;
}

struct BuiltTrace {
    std::shared_ptr<const LerTrace> trace;
    std::uint64_t length_cycles = 0;
};

std::uint64_t cycles_covering(double duration, double cycle_time) {
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::floor(duration / cycle_time)) + 1);
}

BuiltTrace build_trace(const json &j, const ExperimentConfig &cfg, std::uint64_t seed, const std::string &base_dir) {
    const auto kind = require<std::string>(j, "kind", "trace");
    const double ct = cfg.cycle_time();
    BuiltTrace out;
    if (kind == "exponential") {
        expect_keys(j, "trace", {"kind", "p0", "tau_s", "tau_cycles", "length_cycles", "samples"});
        out.length_cycles = require<std::uint64_t>(j, "length_cycles", "trace");
        double tau = j.contains("tau_cycles") ? require<double>(j, "tau_cycles", "trace") * ct
                                              : require<double>(j, "tau_s", "trace");
        int n = get_or<int>(j, "samples", 1001);
        out.trace = std::make_shared<LerTrace>(exponential_ler_trace(
            require<double>(j, "p0", "trace"), tau, static_cast<double>(out.length_cycles - 1) * ct, n));
        return out;
    }
    if (kind == "slow_drift") {
        expect_keys(j, "trace", {"kind", "p0_lo", "p0_hi", "mu", "sigma", "clamp", "shared_drift_constant",
                                 "length_cycles", "samples", "bursts"});
        out.length_cycles = require<std::uint64_t>(j, "length_cycles", "trace");
        SlowDriftParams params;
        params.p0_lo = get_or<double>(j, "p0_lo", params.p0_lo);
        params.p0_hi = get_or<double>(j, "p0_hi", params.p0_hi);
        params.mu = get_or<double>(j, "mu", params.mu);
        params.sigma = get_or<double>(j, "sigma", params.sigma);
        params.clamp = get_or<double>(j, "clamp", params.clamp);
        params.shared_drift_constant = get_or<bool>(j, "shared_drift_constant", false);
        CodeLayout layout = build_rotated_code(cfg.d);
        SlowDriftModel model = sample_slow_drift_model(seed, layout, params);
        auto bursts = parse_bursts(j.value("bursts", json()), tile_components(layout, params.tile_id));
        int n = get_or<int>(j, "samples", 1001);
        std::function<double(const PhysicalErrorConfig &)> map;
        if (cfg.d == 3) {
            auto sim = std::make_shared<CodeCapacitySimulator>(layout);
            map = [sim](const PhysicalErrorConfig &c) { return exact_code_capacity_ler(*sim, c.mean_probability()); };
        } else {
            const PowerLawFit fit = cfg.fit;
            map = [layout, fit](const PhysicalErrorConfig &c) {
                return fit_ler(fit, exact_code_capacity_dfr(layout, c.mean_probability()));
            };
        }
        out.trace = std::make_shared<LerTrace>(
            ler_trace_from_drift(model, bursts, static_cast<double>(out.length_cycles - 1) * ct, n, map));
        return out;
    }
    if (kind == "volatile") {
        expect_keys(j, "trace", {"kind", "duration_s", "base_dfr", "jump_rate", "jump_scale", "sample_interval_s",
                                 "reversion_rate", "volatility"});
        VolatileTraceParams p;
        p.duration = get_or<double>(j, "duration_s", p.duration);
        p.base_dfr = get_or<double>(j, "base_dfr", p.base_dfr);
        p.jump_rate = get_or<double>(j, "jump_rate", p.jump_rate);
        p.jump_scale = get_or<double>(j, "jump_scale", p.jump_scale);
        p.sample_interval = get_or<double>(j, "sample_interval_s", p.sample_interval);
        p.reversion_rate = get_or<double>(j, "reversion_rate", p.reversion_rate);
        p.volatility = get_or<double>(j, "volatility", p.volatility);
        p.cycle_time = ct;
        DfrTrace dfr = synth_volatile_trace(seed, p);
        out.trace = std::make_shared<LerTrace>(ler_from_dfr(dfr, cfg.fit));
        out.length_cycles = cycles_covering(dfr.duration(), ct);
        return out;
    }
    if (kind == "dfr_csv" || kind == "ler_csv") {
        expect_keys(j, "trace", {"kind", "path", "length_cycles"});
        auto path = resolve(base_dir, require<std::string>(j, "path", "trace"));
        std::ifstream in(path);
        if (!in) {
            throw ConfigError(fmt::format("cannot open trace {}", path.string()));
        }
        LerTrace t = kind == "ler_csv" ? read_ler_trace_csv(in) : ler_from_dfr(read_dfr_trace_csv(in, ct), cfg.fit);
        out.length_cycles = get_or<std::uint64_t>(j, "length_cycles", cycles_covering(t.end_time(), ct));
        out.trace = std::make_shared<LerTrace>(std::move(t));
        return out;
    }
    throw ConfigError(fmt::format("unknown trace kind '{}'", kind));
}

std::vector<int> int_list(const json &j, const char *key) {
    return get_or<std::vector<int>>(j, key, {});
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string &json_text, const std::string &base_dir) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception &e) {
        throw ConfigError(fmt::format("malformed experiment config: {}", e.what()));
    }
    expect_keys(j, "experiment config",
                {"name", "seed", "grid", "distance", "round_time_s", "qubits", "reloqation_tiles", "disabled_tiles",
                 "total_cycles", "recalibration_cycles", "remap_latency_cycles", "predictor", "fit", "trace",
                 "trace_assignment"});
    ExperimentConfig cfg;
    cfg.name = get_or<std::string>(j, "name", cfg.name);
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    const json grid = j.value("grid", json::object());
    expect_keys(grid, "grid", {"rows", "cols"});
    cfg.rows = get_or<int>(grid, "rows", cfg.rows);
    cfg.cols = get_or<int>(grid, "cols", cfg.cols);
    cfg.d = get_or<int>(j, "distance", cfg.d);
    check_distance(cfg.d);
    cfg.round_time = get_or<double>(j, "round_time_s", cfg.round_time);
    if (j.contains("qubits")) {
        for (const auto &q : j.at("qubits")) {
            expect_keys(q, "qubit placement", {"id", "tile"});
            cfg.qubits.push_back({require<int>(q, "id", "qubit placement"), require<int>(q, "tile", "qubit placement")});
        }
    }
    cfg.reloqation_tiles = int_list(j, "reloqation_tiles");
    cfg.disabled_tiles = int_list(j, "disabled_tiles");
    cfg.total_cycles = get_or<std::uint64_t>(j, "total_cycles", cfg.total_cycles);
    cfg.recalibration_cycles = get_or<std::uint64_t>(j, "recalibration_cycles", cfg.recalibration_cycles);
    cfg.remap_latency_cycles = get_or<std::uint64_t>(j, "remap_latency_cycles", cfg.remap_latency_cycles);

    const json pred = j.value("predictor", json::object());
    expect_keys(pred, "predictor", {"k", "alpha", "multiplier", "target_ler"});
    cfg.predictor.k = get_or<std::uint32_t>(pred, "k", cfg.predictor.k);
    cfg.predictor.alpha = get_or<double>(pred, "alpha", cfg.predictor.alpha);
    cfg.predictor.multiplier = get_or<double>(pred, "multiplier", cfg.predictor.multiplier);
    cfg.predictor.target_ler = get_or<double>(pred, "target_ler", cfg.predictor.target_ler);
    cfg.predictor.validate();

    if (!j.contains("fit")) {
        throw ConfigError("missing 'fit' in experiment config");
    }
    cfg.fit = parse_fit(j.at("fit"), cfg.d, cfg.seed, base_dir);
    if (cfg.fit.d != cfg.d) {
        throw ConfigError(fmt::format("fit is for d = {} but the architecture uses d = {}", cfg.fit.d, cfg.d));
    }

    if (!j.contains("trace")) {
        throw ConfigError("missing 'trace' in experiment config");
    }
    const json assign = j.value("trace_assignment", json::object());
    expect_keys(assign, "trace_assignment", {"mode", "offsets_cycles"});
    const auto mode = get_or<std::string>(assign, "mode", "shared");
    const int n = cfg.rows * cfg.cols;
    if (n < 1) {
        throw ConfigError("grid must have at least one row and column");
    }
    std::vector<BuiltTrace> built;
    if (mode == "shared") {
        built.assign(static_cast<std::size_t>(n), build_trace(j.at("trace"), cfg, derive_seed(cfg.seed, "trace", 0), base_dir));
    } else if (mode == "independent") {
        for (int t = 0; t < n; t++) {
            built.push_back(build_trace(j.at("trace"), cfg, derive_seed(cfg.seed, "trace", static_cast<std::uint64_t>(t)),
                                        base_dir));
        }
    } else {
        throw ConfigError(fmt::format("unknown trace assignment mode '{}'", mode));
    }
    std::vector<std::uint64_t> offsets = get_or<std::vector<std::uint64_t>>(assign, "offsets_cycles", {});
    if (!offsets.empty() && static_cast<int>(offsets.size()) != n) {
        throw ConfigError(fmt::format("offsets_cycles needs {} entries, got {}", n, offsets.size()));
    }
    for (int t = 0; t < n; t++) {
        TileTrace tt;
        tt.trace = built[static_cast<std::size_t>(t)].trace;
        tt.length_cycles = built[static_cast<std::size_t>(t)].length_cycles;
        if (!offsets.empty()) {
            tt.offset_cycles = offsets[static_cast<std::size_t>(t)];
        } else if (mode == "shared") {
            tt.offset_cycles = tt.length_cycles * static_cast<std::uint64_t>(t) / static_cast<std::uint64_t>(n);
        }
        cfg.traces.push_back(std::move(tt));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string &path) {
    std::filesystem::path p(path);
    return parse_experiment_config(read_text(p), p.has_parent_path() ? p.parent_path().string() : ".");
}

}  // namespace driftqec
