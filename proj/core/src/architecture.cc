#include "driftqec/architecture.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "driftqec/errors.h"

namespace driftqec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::uint32_t sample_binomial(std::uint32_t n, double p, Rng &rng) {
    if (n == 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    if (p > 0.5) {
        return n - sample_binomial(n, 1.0 - p, rng);
    }
    if (n > 1000) {
        std::binomial_distribution<std::uint32_t> dist(n, p);
        return dist(rng);
    }
    const double u = uniform01(rng);
    const double ratio = p / (1.0 - p);
    double pmf = std::pow(1.0 - p, static_cast<double>(n));
    double cdf = pmf;
    std::uint32_t k = 0;
    while (u >= cdf && k < n) {
        pmf *= static_cast<double>(n - k) / static_cast<double>(k + 1) * ratio;
        k++;
        cdf += pmf;
    }
    return k;
}

double observed_dfr(double true_dfr, int detectors_per_round, int d, Rng &rng) {
    const auto bits = static_cast<std::uint32_t>(detectors_per_round * d);
    return static_cast<double>(sample_binomial(bits, true_dfr, rng)) / static_cast<double>(bits);
}

std::string_view phase_name(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::active:
            return "active";
        case PhaseKind::available:
            return "available";
        case PhaseKind::recalibrating:
            return "recalibrating";
        case PhaseKind::warm_up:
            return "warmup";
        case PhaseKind::disabled:
            return "disabled";
    }
    return "unknown";
}

bool is_legal_transition(PhaseKind from, PhaseKind to) {
    return (from == PhaseKind::active && to == PhaseKind::recalibrating) ||
           (from == PhaseKind::recalibrating && to == PhaseKind::warm_up) ||
           (from == PhaseKind::warm_up && to == PhaseKind::available) ||
           (from == PhaseKind::available && to == PhaseKind::active);
}

void ExperimentConfig::validate() const {
    if (rows < 1 || cols < 1) {
        throw ConfigError("grid must have at least one row and column");
    }
    check_distance(d);
    if (fit.d != d) {
        throw ConfigError(fmt::format("fit is for d = {} but the architecture uses d = {}", fit.d, d));
    }
    if (!(round_time > 0.0)) {
        throw ConfigError("round time must be positive");
    }
    predictor.validate();
    if (total_cycles < predictor.k) {
        throw ConfigError(
            fmt::format("total cycles ({}) shorter than warm-up (k = {})", total_cycles, predictor.k));
    }
    if (recalibration_cycles < 1) {
        throw ConfigError("recalibration must take at least one cycle");
    }
    const int n = tile_count();
    auto in_range = [n](int t) { return t >= 0 && t < n; };
    std::set<int> reloq(reloqation_tiles.begin(), reloqation_tiles.end());
    std::set<int> disabled(disabled_tiles.begin(), disabled_tiles.end());
    for (int t : reloq) {
        if (!in_range(t)) {
            throw ConfigError(fmt::format("reloqation tile {} outside the {}x{} grid", t, rows, cols));
        }
    }
    for (int t : disabled) {
        if (!in_range(t)) {
            throw ConfigError(fmt::format("disabled tile {} outside the grid", t));
        }
    }
    std::set<int> used_tiles;
    std::set<int> ids;
    for (const auto &q : qubits) {
        if (q.qubit < 0 || !ids.insert(q.qubit).second) {
            throw ConfigError(fmt::format("invalid placement: qubit id {} negative or repeated", q.qubit));
        }
        if (!in_range(q.tile) || disabled.contains(q.tile) || !used_tiles.insert(q.tile).second) {
            throw ConfigError(fmt::format("invalid placement: qubit {} on tile {}", q.qubit, q.tile));
        }
    }
    if (!qubits.empty()) {
        bool spare = std::any_of(reloq.begin(), reloq.end(),
                                 [&](int t) { return !used_tiles.contains(t) && !disabled.contains(t); });
        if (!spare) {
            throw ConfigError("invalid placement: no reloqation tile is free to receive a remap");
        }
    }
    if (static_cast<int>(traces.size()) != n) {
        throw ConfigError(fmt::format("need one truth trace per tile ({}), got {}", n, traces.size()));
    }
    for (const auto &t : traces) {
        if (!t.trace || t.trace->empty() || t.length_cycles < 1) {
            throw ConfigError("every tile needs a non-empty truth trace");
        }
    }
}

Architecture::Architecture(const ExperimentConfig &config) : config_(config) {
    config_.validate();
    const int n = config_.tile_count();
    std::set<int> reloq(config_.reloqation_tiles.begin(), config_.reloqation_tiles.end());
    std::set<int> disabled(config_.disabled_tiles.begin(), config_.disabled_tiles.end());
    int max_qubit = -1;
    for (const auto &q : config_.qubits) {
        max_qubit = std::max(max_qubit, q.qubit);
    }
    qubit_location_.assign(static_cast<std::size_t>(max_qubit + 1), -1);
    tiles_.reserve(static_cast<std::size_t>(n));
    for (int id = 0; id < n; id++) {
        Tile t;
        t.id = id;
        t.row = id / config_.cols;
        t.col = id % config_.cols;
        t.is_reloqation = reloq.contains(id);
        t.truth = config_.traces[static_cast<std::size_t>(id)];
        t.cursor = t.truth.offset_cycles % t.truth.length_cycles;
        t.buffer = DfrBuffer(config_.predictor.k);
        t.rng = make_rng(config_.seed, "arch.tile", static_cast<std::uint64_t>(id));
        t.phase = disabled.contains(id) ? TilePhase::disabled() : TilePhase::warm_up(config_.predictor.k);
        tiles_.push_back(std::move(t));
    }
    for (const auto &q : config_.qubits) {
        tiles_[static_cast<std::size_t>(q.tile)].phase = TilePhase::active(q.qubit);
        qubit_location_[static_cast<std::size_t>(q.qubit)] = q.tile;
    }
}

int Architecture::qubit_tile(int qubit) const {
    return qubit_location_.at(static_cast<std::size_t>(qubit));
}

bool Architecture::in_transit(int qubit) const {
    return std::any_of(transits_.begin(), transits_.end(), [qubit](const Transit &t) { return t.event.qubit == qubit; });
}

void Architecture::set_phase(Tile &tile, TilePhase next, ExperimentReport *report) {
    if (report) {
        report->transitions.push_back({cycle_ + 1, tile.id, tile.phase.kind, next.kind});
    }
    tile.phase = next;
}

double Architecture::true_ler_of(const Tile &tile) const {
    return tile.truth.trace->at(static_cast<double>(tile.cursor) * config_.cycle_time());
}

std::optional<std::uint64_t> Architecture::cycles_until_truth_breach(const Tile &tile) const {
    const double target = config_.predictor.target_ler;
    for (std::uint64_t c = tile.cursor; c < tile.truth.length_cycles; c++) {
        if (tile.truth.trace->at(static_cast<double>(c) * config_.cycle_time()) > target) {
            return c - tile.cursor;
        }
    }
    return std::nullopt;
}

void Architecture::complete_transits(ExperimentReport *report) {
    std::vector<Transit> pending;
    for (const auto &t : transits_) {
        if (t.event.completion_cycle() <= cycle_) {
            Tile &source = tiles_[static_cast<std::size_t>(t.event.from_tile)];
            // Recalibration starts on the cycle after the qubit has left.
            if (report) {
                report->transitions.push_back({cycle_ + 1, source.id, source.phase.kind, PhaseKind::recalibrating});
            }
            source.phase = TilePhase::recalibrating(config_.recalibration_cycles);
            source.stint_true_breach.reset();
            qubit_location_[static_cast<std::size_t>(t.event.qubit)] = t.event.to_tile;
        } else {
            pending.push_back(t);
        }
    }
    transits_ = std::move(pending);
}

std::optional<int> Architecture::select_target(int excluding) const {
    const double target = config_.predictor.target_ler;
    std::optional<int> best;
    std::tuple<int, double, int> best_key{3, 0.0, 0};
    for (const Tile &t : tiles_) {
        if (t.id == excluding || !t.is_reloqation || t.phase.kind != PhaseKind::available) {
            continue;
        }
        const Prediction &p = t.last_prediction;
        int rank = !p.valid ? 2 : (p.used <= target ? 0 : 1);
        std::tuple<int, double, int> key{rank, p.valid ? p.used : 0.0, t.id};
        if (!best || key < best_key) {
            best = t.id;
            best_key = key;
        }
    }
    return best;
}

RemapEvent Architecture::trigger_remap(int qubit, int target, std::uint64_t cycle) {
    const int from = qubit_tile(qubit);
    Tile &dest = tiles_.at(static_cast<std::size_t>(target));
    if (from == target) {
        throw ConfigError("remap source and target coincide");
    }
    if (dest.phase.kind != PhaseKind::available) {
        throw ConfigError(fmt::format("tile {} is {} and cannot receive a remap", target, phase_name(dest.phase.kind)));
    }
    RemapEvent ev{cycle, qubit, from, target, config_.remap_latency_cycles};
    dest.phase = TilePhase::active(qubit);
    dest.stint_true_breach.reset();
    transits_.push_back({ev});
    return ev;
}

void Architecture::step(ExperimentReport *report) {
    cycle_++;
    const std::uint64_t c = cycle_;
    const double target = config_.predictor.target_ler;
    const int detectors = config_.d * config_.d - 1;

    complete_transits(report);

    std::vector<double> truth_now(tiles_.size(), 0.0);
    for (Tile &tile : tiles_) {
        CycleRecord rec;
        rec.phase = tile.phase.kind;
        const double truth = true_ler_of(tile);
        rec.true_ler = truth;
        truth_now[static_cast<std::size_t>(tile.id)] = truth;
        switch (tile.phase.kind) {
            case PhaseKind::disabled:
                rec.obs_dfr = kNaN;
                tile.last_prediction = Prediction{};
                break;
            case PhaseKind::recalibrating:
                rec.obs_dfr = kNaN;
                tile.last_prediction = Prediction{};
                if (--tile.phase.remaining == 0) {
                    tile.buffer.clear();
                    tile.cursor = 0;
                    set_phase(tile, TilePhase::warm_up(config_.predictor.k), report);
                }
                break;
            case PhaseKind::active:
            case PhaseKind::available:
            case PhaseKind::warm_up: {
                // Decide on the DFRs of completed cycles, then accrue this one.
                Prediction p = predict_tile(tile.buffer, config_.fit, config_.predictor);
                double obs = observed_dfr(invert_ler_to_dfr(config_.fit, truth), detectors, config_.d, tile.rng);
                tile.buffer.push(obs);
                tile.cursor = (tile.cursor + 1) % tile.truth.length_cycles;
                tile.last_prediction = p;
                rec.obs_dfr = obs;
                rec.used = p.used;
                rec.valid = p.valid;
                rec.breach = detect_breach(p, target);
                if (p.valid && report) {
                    report->metrics.mean_l1 += std::abs(p.used - truth);
                    report->metrics.l1_cycles++;
                }
                if (tile.phase.kind == PhaseKind::active && truth > target && !tile.stint_true_breach) {
                    tile.stint_true_breach = c;
                }
                if (tile.phase.kind == PhaseKind::warm_up) {
                    tile.phase.remaining--;
                }
                break;
            }
        }
        if (report) {
            report->records.push_back(rec);
        }
    }

    if (report) {
        for (std::size_t q = 0; q < qubit_location_.size(); q++) {
            int loc = qubit_location_[q];
            if (loc < 0) {
                continue;
            }
            double ler = truth_now[static_cast<std::size_t>(loc)];
            for (const auto &t : transits_) {
                if (t.event.qubit == static_cast<int>(q)) {
                    ler = std::max(ler, truth_now[static_cast<std::size_t>(t.event.to_tile)]);
                }
            }
            report->qubit_ler[q].push_back(ler);
            if (ler > target) {
                report->metrics.cycles_above_target++;
            }
        }
    }

    // Serialized remap phase, in tile order.
    for (Tile &tile : tiles_) {
        if (tile.phase.kind != PhaseKind::active) {
            continue;
        }
        const int qubit = tile.phase.qubit;
        if (in_transit(qubit) || qubit_tile(qubit) != tile.id) {
            continue;
        }
        if (!detect_breach(tile.last_prediction, target)) {
            continue;
        }
        std::optional<int> dest = select_target(tile.id);
        if (!dest) {
            if (report) {
                report->deferrals.push_back({c, qubit, tile.id});
                report->metrics.deferral_count++;
            }
            continue;
        }
        BreachReport gap;
        gap.predicted_breach_cycle = static_cast<std::int64_t>(c);
        if (tile.stint_true_breach) {
            gap.true_breach_cycle = static_cast<std::int64_t>(*tile.stint_true_breach);
        } else if (auto ahead = cycles_until_truth_breach(tile)) {
            gap.true_breach_cycle = static_cast<std::int64_t>(c + 1 + *ahead);
        }
        if (gap.true_breach_cycle) {
            gap.gap = *gap.true_breach_cycle - *gap.predicted_breach_cycle;
            gap.zealous = *gap.gap > 0;
        }
        Tile &dest_tile = tiles_[static_cast<std::size_t>(*dest)];
        if (report) {
            report->transitions.push_back({c + 1, dest_tile.id, dest_tile.phase.kind, PhaseKind::active});
        }
        RemapEvent ev = trigger_remap(qubit, *dest, c);
        if (report) {
            report->remaps.push_back(ev);
            report->metrics.remap_count++;
            report->metrics.breach_gaps.push_back(gap);
        }
    }
    // Zero-latency remaps finish inside the cycle that triggered them.
    if (config_.remap_latency_cycles == 0) {
        complete_transits(report);
    }
    // Warm-up ends after the remap phase, so a tile is Available from the
    // first cycle in which its prediction is valid.
    for (Tile &tile : tiles_) {
        if (tile.phase.kind == PhaseKind::warm_up && tile.phase.remaining == 0) {
            set_phase(tile, TilePhase::available(), report);
        }
    }
}

ExperimentReport run_memory_experiment(const ExperimentConfig &config) {
    Architecture arch(config);
    ExperimentReport report;
    report.name = config.name;
    report.seed = config.seed;
    report.total_cycles = config.total_cycles;
    report.tile_count = config.tile_count();
    report.records.reserve(config.total_cycles * static_cast<std::uint64_t>(config.tile_count()));
    int max_qubit = -1;
    for (const auto &q : config.qubits) {
        max_qubit = std::max(max_qubit, q.qubit);
    }
    report.qubit_ler.resize(static_cast<std::size_t>(max_qubit + 1));
    for (auto &series : report.qubit_ler) {
        series.reserve(config.total_cycles);
    }
    for (std::uint64_t c = 0; c < config.total_cycles; c++) {
        arch.step(&report);
    }
    if (report.metrics.l1_cycles > 0) {
        report.metrics.mean_l1 /= static_cast<double>(report.metrics.l1_cycles);
    }
    return report;
}

namespace {

nlohmann::ordered_json optional_json(const std::optional<std::int64_t> &v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

void write_report_json(std::ostream &out, const ExperimentReport &report, const ExperimentConfig &config) {
    nlohmann::ordered_json j;
    j["name"] = report.name;
    j["seed"] = report.seed;
    j["total_cycles"] = report.total_cycles;
    j["grid"] = {{"rows", config.rows}, {"cols", config.cols}};
    j["distance"] = config.d;
    j["predictor"] = {{"k", config.predictor.k},
                      {"alpha", config.predictor.alpha},
                      {"multiplier", config.predictor.multiplier},
                      {"target_ler", config.predictor.target_ler}};
    j["recalibration_cycles"] = config.recalibration_cycles;
    j["remap_latency_cycles"] = config.remap_latency_cycles;
    j["fit"] = {{"d", config.fit.d},
                {"log_A", config.fit.log_A},
                {"b", config.fit.b},
                {"sigma_logA", config.fit.sigma_logA},
                {"sigma_b", config.fit.sigma_b}};
    const auto &m = report.metrics;
    nlohmann::ordered_json gaps = nlohmann::ordered_json::array();
    for (const auto &g : m.breach_gaps) {
        gaps.push_back({{"predicted_breach_cycle", optional_json(g.predicted_breach_cycle)},
                        {"true_breach_cycle", optional_json(g.true_breach_cycle)},
                        {"gap", optional_json(g.gap)},
                        {"zealous", g.zealous}});
    }
    j["metrics"] = {{"cycles_above_target", m.cycles_above_target},
                    {"remap_count", m.remap_count},
                    {"deferral_count", m.deferral_count},
                    {"mean_l1", m.mean_l1},
                    {"l1_cycles", m.l1_cycles},
                    {"breach_gaps", gaps}};
    nlohmann::ordered_json remaps = nlohmann::ordered_json::array();
    for (const auto &r : report.remaps) {
        remaps.push_back({{"cycle", r.cycle},
                          {"qubit", r.qubit},
                          {"from_tile", r.from_tile},
                          {"to_tile", r.to_tile},
                          {"latency_cycles", r.latency_cycles}});
    }
    j["remaps"] = remaps;
    nlohmann::ordered_json deferrals = nlohmann::ordered_json::array();
    for (const auto &dr : report.deferrals) {
        deferrals.push_back({{"cycle", dr.cycle}, {"qubit", dr.qubit}, {"tile", dr.tile}});
    }
    j["deferrals"] = deferrals;
    out << j.dump(2) << "\n";
}

void write_cycle_csv(std::ostream &out, const ExperimentReport &report) {
    out << "cycle,tile,phase,true_ler,obs_dfr,used_pred,breach\n";
    fmt::memory_buffer buf;
    const auto tiles = static_cast<std::uint64_t>(report.tile_count);
    for (std::uint64_t i = 0; i < report.records.size(); i++) {
        const CycleRecord &r = report.records[i];
        fmt::format_to(std::back_inserter(buf), "{},{},{},{:.9g},", i / tiles + 1, i % tiles, phase_name(r.phase),
                       r.true_ler);
        if (!std::isnan(r.obs_dfr)) {
            fmt::format_to(std::back_inserter(buf), "{:.9g}", r.obs_dfr);
        }
        buf.push_back(',');
        if (r.valid) {
            fmt::format_to(std::back_inserter(buf), "{:.9g}", r.used);
        }
        fmt::format_to(std::back_inserter(buf), ",{}\n", r.breach ? 1 : 0);
        if (buf.size() > (1 << 20)) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

SingleTileRun run_single_tile(
    std::span<const double> truth, const PowerLawFit &fit, const PredictorConfig &config, std::uint64_t seed) {
    config.validate();
    SingleTileRun run;
    run.truth.assign(truth.begin(), truth.end());
    run.observed.reserve(truth.size());
    run.predictions.reserve(truth.size());
    DfrBuffer buffer(config.k);
    Rng rng = make_rng(seed, "single.tile");
    for (double t : truth) {
        run.predictions.push_back(predict_tile(buffer, fit, config));
        double obs = observed_dfr(invert_ler_to_dfr(fit, t), fit.detectors(), fit.d, rng);
        buffer.push(obs);
        run.observed.push_back(obs);
    }
    return run;
}

}  // namespace driftqec
