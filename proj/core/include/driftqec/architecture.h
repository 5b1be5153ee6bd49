#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "driftqec/code_model.h"
#include "driftqec/drift.h"
#include "driftqec/predictor.h"
#include "driftqec/seeding.h"

namespace driftqec {

/// Binomial(d N, true_dfr) / (d N): the fired fraction over one cycle of d
/// rounds with N detectors each.
double observed_dfr(double true_dfr, int detectors_per_round, int d, Rng &rng);

/// Inversion sampler; stable across standard library implementations.
std::uint32_t sample_binomial(std::uint32_t n, double p, Rng &rng);

enum class PhaseKind : std::uint8_t { active, available, recalibrating, warm_up, disabled };

std::string_view phase_name(PhaseKind kind);

struct TilePhase {
    PhaseKind kind = PhaseKind::available;
    int qubit = -1;                // Active only
    std::uint64_t remaining = 0;   // Recalibrating / WarmUp only

    static TilePhase active(int qubit) {
        return {PhaseKind::active, qubit, 0};
    }
    static TilePhase available() {
        return {PhaseKind::available, -1, 0};
    }
    static TilePhase recalibrating(std::uint64_t cycles) {
        return {PhaseKind::recalibrating, -1, cycles};
    }
    static TilePhase warm_up(std::uint64_t cycles) {
        return {PhaseKind::warm_up, -1, cycles};
    }
    static TilePhase disabled() {
        return {PhaseKind::disabled, -1, 0};
    }
};

/// Active->Recalibrating, Recalibrating->WarmUp, WarmUp->Available,
/// Available->Active.
bool is_legal_transition(PhaseKind from, PhaseKind to);

/// Ground truth seen by one tile: a (possibly shared) trace read from a
/// cursor that wraps at length_cycles and restarts at 0 after recalibration.
struct TileTrace {
    std::shared_ptr<const LerTrace> trace;
    std::uint64_t offset_cycles = 0;
    std::uint64_t length_cycles = 0;
};

struct QubitPlacement {
    int qubit = 0;
    int tile = 0;
};

struct ExperimentConfig {
    std::string name = "experiment";
    int rows = 2;
    int cols = 2;
    int d = 3;
    double round_time = 1.1e-6;
    std::vector<QubitPlacement> qubits;
    std::vector<int> reloqation_tiles;
    std::vector<int> disabled_tiles;
    PredictorConfig predictor;
    std::uint64_t recalibration_cycles = 250'000;
    std::uint64_t remap_latency_cycles = 2;
    std::uint64_t total_cycles = 1'000'000;
    std::uint64_t seed = 0;
    PowerLawFit fit;
    std::vector<TileTrace> traces;  // one per tile, row-major

    int tile_count() const {
        return rows * cols;
    }
    double cycle_time() const {
        return d * round_time;
    }
    /// Throws ConfigError on invalid placements or timings.
    void validate() const;
};

struct RemapEvent {
    std::uint64_t cycle = 0;  // trigger cycle
    int qubit = 0;
    int from_tile = 0;
    int to_tile = 0;
    std::uint64_t latency_cycles = 0;
    std::uint64_t completion_cycle() const {
        return cycle + latency_cycles;
    }
};

struct DeferralRecord {
    std::uint64_t cycle = 0;
    int qubit = 0;
    int tile = 0;
};

struct PhaseTransition {
    std::uint64_t cycle = 0;  // first cycle spent in `to`
    int tile = 0;
    PhaseKind from;
    PhaseKind to;
};

struct CycleRecord {
    double true_ler = 0.0;
    double obs_dfr = 0.0;  // NaN while recalibrating or disabled
    double used = 0.0;
    PhaseKind phase = PhaseKind::available;
    bool valid = false;
    bool breach = false;
};

struct ExperimentMetrics {
    std::uint64_t cycles_above_target = 0;  // qubit-cycles with true LER > target
    std::uint64_t remap_count = 0;
    std::uint64_t deferral_count = 0;
    double mean_l1 = 0.0;
    std::uint64_t l1_cycles = 0;
    std::vector<BreachReport> breach_gaps;  // one per remap
};

struct ExperimentReport {
    std::string name;
    std::uint64_t seed = 0;
    std::uint64_t total_cycles = 0;
    int tile_count = 0;
    std::vector<CycleRecord> records;  // (cycle - 1) * tile_count + tile
    std::vector<RemapEvent> remaps;
    std::vector<DeferralRecord> deferrals;
    std::vector<PhaseTransition> transitions;
    std::vector<std::vector<double>> qubit_ler;  // per qubit, per cycle
    ExperimentMetrics metrics;

    const CycleRecord &record(std::uint64_t cycle, int tile) const {
        return records[(cycle - 1) * static_cast<std::uint64_t>(tile_count) + static_cast<std::uint64_t>(tile)];
    }
};

struct Tile {
    int id = 0;
    int row = 0;
    int col = 0;
    bool is_reloqation = false;
    TilePhase phase;
    TileTrace truth;
    std::uint64_t cursor = 0;
    DfrBuffer buffer{1};
    Rng rng;
    Prediction last_prediction;
    // First cycle of the current Active stint whose truth exceeded the target.
    std::optional<std::uint64_t> stint_true_breach;
};

/// Tile-grid runtime. One call to step() simulates one QEC cycle on every tile
/// and then runs the serialized remap phase.
class Architecture {
   public:
    explicit Architecture(const ExperimentConfig &config);

    /// Advances one cycle and appends its records to `report` (when given).
    void step(ExperimentReport *report = nullptr);

    /// Best Available reloqation tile other than `excluding`: any at or below
    /// target (lowest used, then id), else the lowest used; tiles without a
    /// valid prediction rank last.
    std::optional<int> select_target(int excluding) const;

    /// Starts moving `qubit` off its tile. The target is claimed immediately;
    /// the source enters recalibration once the latency has elapsed.
    RemapEvent trigger_remap(int qubit, int target, std::uint64_t cycle);

    std::uint64_t cycle() const {
        return cycle_;
    }
    const std::vector<Tile> &tiles() const {
        return tiles_;
    }
    std::vector<Tile> &tiles() {
        return tiles_;
    }
    /// Tile currently holding the qubit (the source while in transit).
    int qubit_tile(int qubit) const;
    bool in_transit(int qubit) const;

   private:
    struct Transit {
        RemapEvent event;
    };
    void set_phase(Tile &tile, TilePhase next, ExperimentReport *report);
    void complete_transits(ExperimentReport *report);
    double true_ler_of(const Tile &tile) const;
    std::optional<std::uint64_t> cycles_until_truth_breach(const Tile &tile) const;

    ExperimentConfig config_;
    std::vector<Tile> tiles_;
    std::vector<int> qubit_location_;  // indexed by qubit id
    std::vector<Transit> transits_;
    std::uint64_t cycle_ = 0;
};

/// Runs total_cycles steps and fills in the metrics.
ExperimentReport run_memory_experiment(const ExperimentConfig &config);

/// JSON summary: configuration echo, metrics, remap and deferral events.
void write_report_json(std::ostream &out, const ExperimentReport &report, const ExperimentConfig &config);
/// `cycle,tile,phase,true_ler,obs_dfr,used_pred,breach`
void write_cycle_csv(std::ostream &out, const ExperimentReport &report);

/// One tile on a fixed truth series: the predictor sees DFRs sampled from the
/// inverse fit of the truth. The prediction for cycle c uses cycles < c.
struct SingleTileRun {
    std::vector<double> truth;
    std::vector<double> observed;
    std::vector<Prediction> predictions;
};

SingleTileRun run_single_tile(
    std::span<const double> truth, const PowerLawFit &fit, const PredictorConfig &config, std::uint64_t seed);

}  // namespace driftqec
