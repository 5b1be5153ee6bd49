#include "driftqec/architecture.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "driftqec/errors.h"
#include "support/test_support.h"

namespace driftqec {
namespace {

std::shared_ptr<const LerTrace> constant_trace(double ler) {
    return std::make_shared<LerTrace>(std::vector<LerSample>{{0.0, ler}});
}

/// 1 x n grid, qubit 0 on tile 0, every tile reloqation-eligible, constant
/// per-tile truth.
ExperimentConfig line_config(const std::vector<double> &lers) {
    ExperimentConfig c;
    c.rows = 1;
    c.cols = static_cast<int>(lers.size());
    c.d = 3;
    c.fit = testing::make_fit(3, 0.4346, 1.8814, 0.09, 0.05);
    c.qubits = {{0, 0}};
    for (int t = 0; t < c.cols; t++) {
        c.reloqation_tiles.push_back(t);
        c.traces.push_back({constant_trace(lers[static_cast<std::size_t>(t)]), 0, 1});
    }
    c.predictor.k = 10;
    c.predictor.alpha = 0.9;
    c.predictor.multiplier = 1.0;
    c.predictor.target_ler = 1e-3;
    c.recalibration_cycles = 50;
    c.remap_latency_cycles = 2;
    c.total_cycles = 200;
    c.seed = 17;
    return c;
}

TEST(Binomial, EdgesAndMoments) {
    Rng rng = make_rng(1, "binomial");
    EXPECT_EQ(sample_binomial(24, 0.0, rng), 0u);
    EXPECT_EQ(sample_binomial(24, 1.0, rng), 24u);
    EXPECT_EQ(sample_binomial(0, 0.5, rng), 0u);
    for (double p : {0.01, 0.3, 0.7}) {
        double sum = 0.0;
        double sq = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; i++) {
            double x = sample_binomial(24, p, rng);
            sum += x;
            sq += x * x;
        }
        const double mean = sum / n;
        const double var = sq / n - mean * mean;
        EXPECT_NEAR(mean, 24 * p, 5 * std::sqrt(24 * p * (1 - p) / n));
        EXPECT_NEAR(var, 24 * p * (1 - p), 0.05 * 24 * p * (1 - p) + 1e-3);
    }
    // Large counts take the library path but stay in range.
    for (int i = 0; i < 100; i++) {
        EXPECT_LE(sample_binomial(5000, 0.2, rng), 5000u);
    }
}

TEST(ObservedDfr, EdgesAndMean) {
    Rng rng = make_rng(2, "observed");
    EXPECT_EQ(observed_dfr(0.0, 8, 3, rng), 0.0);
    EXPECT_EQ(observed_dfr(1.0, 8, 3, rng), 1.0);
    double sum = 0.0;
    for (int i = 0; i < 10000; i++) {
        double v = observed_dfr(0.1, 8, 3, rng);
        sum += v;
        // Values are multiples of 1/24.
        EXPECT_NEAR(v * 24, std::round(v * 24), 1e-9);
    }
    EXPECT_NEAR(sum / 10000, 0.1, 3 * std::sqrt(0.1 * 0.9 / (24.0 * 1e4)));
}

TEST(Phases, LegalTransitions) {
    using P = PhaseKind;
    EXPECT_TRUE(is_legal_transition(P::active, P::recalibrating));
    EXPECT_TRUE(is_legal_transition(P::recalibrating, P::warm_up));
    EXPECT_TRUE(is_legal_transition(P::warm_up, P::available));
    EXPECT_TRUE(is_legal_transition(P::available, P::active));
    EXPECT_FALSE(is_legal_transition(P::active, P::available));
    EXPECT_FALSE(is_legal_transition(P::recalibrating, P::active));
    EXPECT_FALSE(is_legal_transition(P::warm_up, P::active));
    EXPECT_FALSE(is_legal_transition(P::disabled, P::available));
    EXPECT_FALSE(is_legal_transition(P::available, P::disabled));
    EXPECT_EQ(phase_name(P::warm_up), "warmup");
}

TEST(Architecture, InitialWarmUpLastsExactlyK) {
    ExperimentConfig c = line_config({1e-6, 1e-6});
    ExperimentReport r = run_memory_experiment(c);
    ASSERT_EQ(r.records.size(), 200u * 2u);
    for (int tile : {0, 1}) {
        for (std::uint64_t cycle = 1; cycle <= 10; cycle++) {
            EXPECT_FALSE(r.record(cycle, tile).valid);
        }
        EXPECT_TRUE(r.record(11, tile).valid);
    }
    EXPECT_EQ(r.record(10, 1).phase, PhaseKind::warm_up);
    EXPECT_EQ(r.record(11, 1).phase, PhaseKind::available);
    EXPECT_EQ(r.record(1, 0).phase, PhaseKind::active);
    EXPECT_EQ(r.metrics.remap_count, 0u);
    EXPECT_EQ(r.metrics.cycles_above_target, 0u);
}

TEST(Architecture, RemapLifecycleTimeline) {
    ExperimentConfig c = line_config({1e-2, 1e-6});
    ExperimentReport r = run_memory_experiment(c);
    ASSERT_GE(r.remaps.size(), 1u);
    const RemapEvent &ev = r.remaps.front();
    EXPECT_EQ(ev.cycle, 11u);
    EXPECT_EQ(ev.from_tile, 0);
    EXPECT_EQ(ev.to_tile, 1);
    EXPECT_EQ(ev.completion_cycle(), 13u);
    // Target claimed at once, source leaves after the latency.
    EXPECT_EQ(r.record(12, 1).phase, PhaseKind::active);
    EXPECT_EQ(r.record(12, 0).phase, PhaseKind::active);
    EXPECT_EQ(r.record(13, 0).phase, PhaseKind::recalibrating);
    EXPECT_EQ(r.record(62, 0).phase, PhaseKind::recalibrating);
    EXPECT_EQ(r.record(63, 0).phase, PhaseKind::warm_up);
    EXPECT_EQ(r.record(72, 0).phase, PhaseKind::warm_up);
    EXPECT_EQ(r.record(73, 0).phase, PhaseKind::available);
    EXPECT_FALSE(r.record(72, 0).valid);
    EXPECT_TRUE(r.record(73, 0).valid);
    EXPECT_TRUE(std::isnan(r.record(20, 0).obs_dfr));
    // In transit the qubit sees the worse of both tiles.
    const auto &q = r.qubit_ler[0];
    EXPECT_EQ(q[10], 1e-2);  // cycle 11
    EXPECT_EQ(q[11], 1e-2);  // cycle 12, in transit
    EXPECT_EQ(q[12], 1e-6);  // cycle 13, on the target
    EXPECT_EQ(r.metrics.cycles_above_target, 12u);
    ASSERT_EQ(r.metrics.breach_gaps.size(), r.remaps.size());
    EXPECT_EQ(*r.metrics.breach_gaps[0].predicted_breach_cycle, 11);
    EXPECT_EQ(*r.metrics.breach_gaps[0].true_breach_cycle, 1);
    EXPECT_EQ(*r.metrics.breach_gaps[0].gap, -10);
    EXPECT_FALSE(r.metrics.breach_gaps[0].zealous);
}

TEST(Architecture, ZeroLatencyCompletesInTriggerCycle) {
    ExperimentConfig c = line_config({1e-2, 1e-6});
    c.remap_latency_cycles = 0;
    ExperimentReport r = run_memory_experiment(c);
    ASSERT_GE(r.remaps.size(), 1u);
    EXPECT_EQ(r.remaps[0].cycle, 11u);
    EXPECT_EQ(r.record(12, 0).phase, PhaseKind::recalibrating);
    EXPECT_EQ(r.qubit_ler[0][11], 1e-6);
}

TEST(Architecture, DeferralsWhileNoTargetIsAvailable) {
    ExperimentConfig c = line_config({1e-2, 1e-2});
    ExperimentReport r = run_memory_experiment(c);
    ASSERT_GE(r.remaps.size(), 2u);
    EXPECT_EQ(r.remaps[0].cycle, 11u);
    // Tile 1 breaches as soon as it holds the qubit; tile 0 is back at 73.
    EXPECT_EQ(r.deferrals.front().cycle, 13u);
    EXPECT_EQ(r.deferrals.front().tile, 1);
    EXPECT_EQ(r.remaps[1].cycle, 73u);
    EXPECT_EQ(r.remaps[1].to_tile, 0);
    std::uint64_t before = 0;
    for (const auto &d : r.deferrals) {
        before += d.cycle < 73 ? 1 : 0;
    }
    EXPECT_EQ(before, 60u);
    EXPECT_EQ(r.metrics.deferral_count, r.deferrals.size());
}

TEST(Architecture, UnreachableTargetMeansNoRemaps) {
    ExperimentConfig c = line_config({0.5, 1e-4, 1e-3});
    c.predictor.target_ler = 1.0;
    ExperimentReport r = run_memory_experiment(c);
    EXPECT_EQ(r.metrics.remap_count, 0u);
    for (const auto &rec : r.records) {
        EXPECT_FALSE(rec.breach);
    }
}

TEST(Architecture, InvariantsOverALongRun) {
    ExperimentConfig c = line_config({2e-3, 1e-4, 5e-4, 3e-3});
    c.rows = 2;
    c.cols = 2;
    c.total_cycles = 2000;
    ExperimentReport r = run_memory_experiment(c);
    ASSERT_EQ(r.records.size(), 2000u * 4u);
    for (const auto &t : r.transitions) {
        EXPECT_TRUE(is_legal_transition(t.from, t.to)) << phase_name(t.from) << "->" << phase_name(t.to);
    }
    for (const auto &ev : r.remaps) {
        EXPECT_NE(ev.from_tile, ev.to_tile);
        EXPECT_EQ(r.record(ev.cycle, ev.to_tile).phase, PhaseKind::available);
    }
    // Recalibration and warm-up stints have the configured lengths.
    for (int tile = 0; tile < 4; tile++) {
        std::uint64_t run = 0;
        PhaseKind prev = PhaseKind::disabled;
        for (std::uint64_t cycle = 1; cycle <= 2000; cycle++) {
            PhaseKind k = r.record(cycle, tile).phase;
            if (k != prev && run > 0 && cycle > run + 1) {
                if (prev == PhaseKind::recalibrating) {
                    EXPECT_EQ(run, c.recalibration_cycles);
                }
                if (prev == PhaseKind::warm_up) {
                    EXPECT_EQ(run, c.predictor.k);
                }
            }
            run = k == prev ? run + 1 : 1;
            prev = k;
        }
    }
    // One qubit, at most one Active tile outside transits.
    for (std::uint64_t cycle = 1; cycle <= 2000; cycle++) {
        int active = 0;
        for (int tile = 0; tile < 4; tile++) {
            active += r.record(cycle, tile).phase == PhaseKind::active ? 1 : 0;
        }
        EXPECT_GE(active, 1);
        EXPECT_LE(active, 2);
    }
    // Breaches from invalid predictions never happen.
    for (const auto &rec : r.records) {
        EXPECT_FALSE(rec.breach && !rec.valid);
    }
}

TEST(Architecture, EveryBreachOnHomeTileIsHandled) {
    ExperimentConfig c = line_config({2e-3, 2e-3, 5e-4});
    c.total_cycles = 1000;
    c.recalibration_cycles = 30;
    ExperimentReport r = run_memory_experiment(c);
    std::set<std::uint64_t> handled;
    for (const auto &e : r.remaps) {
        handled.insert(e.cycle);
    }
    for (const auto &d : r.deferrals) {
        handled.insert(d.cycle);
    }
    // Rebuild the qubit's home tile per cycle from completed remaps.
    int home = 0;
    std::size_t next = 0;
    std::optional<std::uint64_t> transit_done;
    for (std::uint64_t cycle = 1; cycle <= c.total_cycles; cycle++) {
        if (transit_done && *transit_done <= cycle) {
            home = r.remaps[next - 1].to_tile;
            transit_done.reset();
        }
        if (!transit_done && r.record(cycle, home).breach) {
            EXPECT_TRUE(handled.contains(cycle)) << "cycle " << cycle;
        }
        if (next < r.remaps.size() && r.remaps[next].cycle == cycle) {
            transit_done = r.remaps[next].completion_cycle();
            next++;
        }
    }
}

TEST(Architecture, Deterministic) {
    ExperimentConfig c = line_config({2e-3, 1e-4, 5e-4});
    c.total_cycles = 500;
    auto a = run_memory_experiment(c);
    auto b = run_memory_experiment(c);
    std::ostringstream ja, jb, ca, cb;
    write_report_json(ja, a, c);
    write_report_json(jb, b, c);
    write_cycle_csv(ca, a);
    write_cycle_csv(cb, b);
    EXPECT_EQ(ja.str(), jb.str());
    EXPECT_EQ(ca.str(), cb.str());
    c.seed = 18;
    auto d = run_memory_experiment(c);
    std::ostringstream cd;
    write_cycle_csv(cd, d);
    EXPECT_NE(ca.str(), cd.str());
}

TEST(Architecture, CycleCsvFormat) {
    ExperimentConfig c = line_config({1e-2, 1e-4});
    c.total_cycles = 20;
    auto r = run_memory_experiment(c);
    std::ostringstream out;
    write_cycle_csv(out, r);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "cycle,tile,phase,true_ler,obs_dfr,used_pred,breach");
    std::getline(in, line);
    EXPECT_EQ(line.substr(0, 11), "1,0,active,");
    EXPECT_EQ(line.substr(line.size() - 3), ",,0");  // no valid prediction yet
    int rows = 0;
    while (std::getline(in, line)) {
        rows++;
    }
    EXPECT_EQ(rows, 39);
}

TEST(Architecture, DisabledTilesStayDisabled) {
    ExperimentConfig c = line_config({1e-2, 1e-4, 1e-4});
    c.disabled_tiles = {1};
    ExperimentReport r = run_memory_experiment(c);
    for (std::uint64_t cycle = 1; cycle <= c.total_cycles; cycle++) {
        EXPECT_EQ(r.record(cycle, 1).phase, PhaseKind::disabled);
        EXPECT_TRUE(std::isnan(r.record(cycle, 1).obs_dfr));
    }
    ASSERT_FALSE(r.remaps.empty());
    EXPECT_EQ(r.remaps[0].to_tile, 2);
}

TEST(Architecture, CursorWrapsAndResets) {
    ExperimentConfig c = line_config({1e-4, 1e-4});
    std::vector<LerSample> s;
    for (int i = 0; i < 5; i++) {
        s.push_back({i * c.cycle_time(), 1e-4 * (i + 1)});
    }
    c.traces[1] = {std::make_shared<LerTrace>(s), 2, 5};
    ExperimentReport r = run_memory_experiment(c);
    for (std::uint64_t cycle = 1; cycle <= 20; cycle++) {
        double expected = 1e-4 * static_cast<double>((cycle - 1 + 2) % 5 + 1);
        EXPECT_NEAR(r.record(cycle, 1).true_ler, expected, 1e-12);
    }
}

class SelectTarget : public ::testing::Test {
   protected:
    void SetUp() override {
        config_ = line_config({1e-4, 1e-4, 1e-4, 1e-4});
        config_.reloqation_tiles = {1, 2, 3};
        arch_ = std::make_unique<Architecture>(config_);
        for (int t = 1; t < 4; t++) {
            auto &tile = arch_->tiles()[static_cast<std::size_t>(t)];
            tile.phase = TilePhase::available();
            tile.last_prediction.valid = true;
        }
    }
    void set_used(int tile, double used, bool valid = true) {
        auto &p = arch_->tiles()[static_cast<std::size_t>(tile)].last_prediction;
        p.used = used;
        p.valid = valid;
    }
    ExperimentConfig config_;
    std::unique_ptr<Architecture> arch_;
};

TEST_F(SelectTarget, PrefersTilesAtOrBelowTarget) {
    set_used(1, 2e-3);
    set_used(2, 5e-4);
    set_used(3, 8e-4);
    EXPECT_EQ(arch_->select_target(0), 2);
    set_used(2, 2e-3);
    set_used(3, 2e-3);
    set_used(1, 5e-4);
    EXPECT_EQ(arch_->select_target(0), 1);
}

TEST_F(SelectTarget, LowestAboveTargetWhenNoneBelow) {
    set_used(1, 5e-3);
    set_used(2, 2e-3);
    set_used(3, 3e-3);
    EXPECT_EQ(arch_->select_target(0), 2);
}

TEST_F(SelectTarget, TiesGoToLowestId) {
    set_used(1, 5e-4);
    set_used(2, 4e-4);
    set_used(3, 4e-4);
    EXPECT_EQ(arch_->select_target(0), 2);
}

TEST_F(SelectTarget, InvalidPredictionsRankLast) {
    set_used(1, 1e-9, false);
    set_used(2, 5e-3);
    set_used(3, 1e-9, false);
    EXPECT_EQ(arch_->select_target(0), 2);
    set_used(2, 5e-3, false);
    EXPECT_EQ(arch_->select_target(0), 1);
}

TEST_F(SelectTarget, OnlyAvailableReloqationTiles) {
    arch_->tiles()[1].phase = TilePhase::recalibrating(5);
    arch_->tiles()[2].phase = TilePhase::warm_up(5);
    set_used(3, 5e-4);
    EXPECT_EQ(arch_->select_target(0), 3);
    EXPECT_EQ(arch_->select_target(3), std::nullopt);
    arch_->tiles()[3].phase = TilePhase::active(1);
    EXPECT_EQ(arch_->select_target(0), std::nullopt);
}

TEST_F(SelectTarget, TriggerRemapRejectsBusyTargets) {
    arch_->tiles()[1].phase = TilePhase::recalibrating(5);
    EXPECT_THROW(arch_->trigger_remap(0, 1, 1), ConfigError);
    EXPECT_THROW(arch_->trigger_remap(0, 0, 1), ConfigError);
    RemapEvent ev = arch_->trigger_remap(0, 2, 1);
    EXPECT_EQ(ev.to_tile, 2);
    EXPECT_TRUE(arch_->in_transit(0));
    EXPECT_EQ(arch_->tiles()[2].phase.kind, PhaseKind::active);
    EXPECT_EQ(arch_->qubit_tile(0), 0);
}

TEST(ConfigValidation, RejectsBadPlacements) {
    auto expect_config_error = [](ExperimentConfig c, const std::string &needle) {
        try {
            c.validate();
            ADD_FAILURE() << "accepted: " << needle;
        } catch (const ConfigError &e) {
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    ExperimentConfig base = line_config({1e-4, 1e-4});
    EXPECT_NO_THROW(base.validate());
    auto c = base;
    c.total_cycles = 5;
    expect_config_error(c, "shorter than warm-up");
    c = base;
    c.qubits = {{0, 5}};
    expect_config_error(c, "invalid placement");
    c = base;
    c.qubits = {{0, 0}, {1, 0}};
    expect_config_error(c, "invalid placement");
    c = base;
    c.reloqation_tiles = {0};
    expect_config_error(c, "invalid placement");
    c = base;
    c.disabled_tiles = {0};
    expect_config_error(c, "invalid placement");
    c = base;
    c.traces.pop_back();
    expect_config_error(c, "trace");
    c = base;
    c.fit.d = 5;
    expect_config_error(c, "fit");
    c = base;
    c.d = 4;
    expect_config_error(c, "distance must be odd");
    c = base;
    c.recalibration_cycles = 0;
    expect_config_error(c, "recalibration");
    EXPECT_THROW(Architecture{c}, ConfigError);
}

TEST(SingleTile, PredictionsLagByOneCycle) {
    std::vector<double> truth(50, 1e-3);
    PredictorConfig pc;
    pc.k = 20;
    auto run = run_single_tile(truth, testing::make_fit(3, 0.4346, 1.8814), pc, 4);
    ASSERT_EQ(run.predictions.size(), 50u);
    for (int i = 0; i < 20; i++) {
        EXPECT_FALSE(run.predictions[static_cast<std::size_t>(i)].valid);
    }
    EXPECT_TRUE(run.predictions[20].valid);
    auto again = run_single_tile(truth, testing::make_fit(3, 0.4346, 1.8814), pc, 4);
    EXPECT_EQ(run.observed, again.observed);
}

}  // namespace
}  // namespace driftqec
