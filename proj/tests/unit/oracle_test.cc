#include "driftqec/oracle.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "driftqec/errors.h"
#include "support/test_support.h"

namespace driftqec {
namespace {

TEST(ExactEnumeration, MatchesIndependentBruteForce) {
    CodeCapacitySimulator sim(build_rotated_code(3));
    for (double p : {1e-3, 1e-2, 3e-2, 0.1}) {
        for (Sector s : {Sector::x_errors, Sector::z_errors}) {
            EXPECT_NEAR(exact_sector_failure(sim, s, p), testing::brute_force_sector_failure(sim.layout(), s, p),
                        1e-15);
        }
        EXPECT_NEAR(exact_code_capacity_ler(sim, p), testing::brute_force_ler(sim.layout(), p), 1e-15);
    }
}

TEST(ExactEnumeration, FrozenReferenceValues) {
    // Brute-force values: weight-2 failures dominate at small p.
    CodeCapacitySimulator sim(build_rotated_code(3));
    const double p = 1e-2;
    const double ref = testing::brute_force_ler(sim.layout(), p);
    EXPECT_NEAR(exact_code_capacity_ler(sim, p), ref, 1e-15);
    // Leading order: at most C(9,2) weight-2 patterns can fail per sector.
    EXPECT_GT(ref, 0.0);
    EXPECT_LT(ref, 2 * 36 * p * p);
}

TEST(ExactEnumeration, RejectsLargerDistances) {
    CodeCapacitySimulator sim(build_rotated_code(5));
    EXPECT_THROW(exact_sector_failure(sim, Sector::x_errors, 0.01), ConfigError);
}

TEST(ExactDfr, MatchesLocalEnumeration) {
    for (int d : {3, 5, 7}) {
        CodeLayout layout = build_rotated_code(d);
        for (double p : {1e-3, 1e-2, 0.1}) {
            EXPECT_NEAR(exact_code_capacity_dfr(layout, p), testing::brute_force_dfr(layout, p), 1e-15);
        }
    }
}

TEST(Sampler, EmpiricalLerWithinThreeSigmaOfExact) {
    CodeCapacitySimulator sim(build_rotated_code(3));
    ShotBatch b = sim.sample(1e-2, 1e-2, 100000, 99);
    const double exact = exact_code_capacity_ler(sim, 1e-2);
    const double sd = std::sqrt(exact * (1 - exact) / 1e5);
    EXPECT_LT(std::abs(b.ler - exact), 3 * sd);
    EXPECT_EQ(b.shots, 100000u);
    EXPECT_NEAR(b.stderr_ler, std::sqrt(b.ler * (1 - b.ler) / 1e5), 1e-12);
}

TEST(Sampler, EmpiricalDfrMatchesExact) {
    for (int d : {3, 5}) {
        CodeCapacitySimulator sim(build_rotated_code(d));
        ShotBatch b = sim.sample(2e-2, 2e-2, 50000, 5);
        const double exact = exact_code_capacity_dfr(sim.layout(), 2e-2);
        const double sd = std::sqrt(exact / (50000.0 * static_cast<double>(d * d - 1)));
        EXPECT_LT(std::abs(b.dfr - exact), 5 * sd) << "d = " << d;
    }
}

TEST(Sampler, ThreadCountDoesNotChangeResults) {
    CodeCapacitySimulator sim(build_rotated_code(5));
    ShotBatch a = sim.sample(3e-2, 3e-2, 70000, 3, 1);
    ShotBatch b = sim.sample(3e-2, 3e-2, 70000, 3, 4);
    EXPECT_EQ(a.fired_detectors, b.fired_detectors);
    EXPECT_EQ(a.logical_errors, b.logical_errors);
}

TEST(Sampler, SameSeedSameResultDifferentSeedDifferent) {
    CodeCapacitySimulator sim(build_rotated_code(3));
    ShotBatch a = sim.sample(2e-2, 2e-2, 20000, 8);
    ShotBatch b = sim.sample(2e-2, 2e-2, 20000, 8);
    ShotBatch c = sim.sample(2e-2, 2e-2, 20000, 9);
    EXPECT_EQ(a.fired_detectors, b.fired_detectors);
    EXPECT_NE(a.fired_detectors, c.fired_detectors);
}

TEST(Sampler, ZeroNoiseNeverFails) {
    CodeCapacitySimulator sim(build_rotated_code(3));
    ShotBatch b = sim.sample(0.0, 0.0, 10000, 1);
    EXPECT_EQ(b.fired_detectors, 0u);
    EXPECT_EQ(b.logical_errors, 0u);
}

TEST(Sampler, RunShotSeesLogicalOperators) {
    CodeCapacitySimulator sim(build_rotated_code(3));
    std::uint64_t column0 = 0;
    for (int q : sim.layout().logical_x) {
        column0 |= 1ULL << q;
    }
    // Logical X as an X error: undetected, flips logical Z.
    ShotOutcome o = sim.run_shot(column0, 0);
    EXPECT_EQ(o.fired, 0);
    EXPECT_TRUE(o.x_logical_flip);
    EXPECT_FALSE(o.z_logical_flip);
    ShotOutcome single = sim.run_shot(1ULL << 4, 0);
    EXPECT_FALSE(single.logical_error());
    EXPECT_GT(single.fired, 0);
}

TEST(Dataset, GridRowsAndValidation) {
    FitDataset data = generate_fit_dataset(3, log_grid(1e-3, 3e-2, 8), 20000, 1);
    EXPECT_EQ(data.rows.size() + data.dropped_p.size(), 8u);
    EXPECT_THROW(generate_fit_dataset(3, {}, 20000, 1), ConfigError);
    EXPECT_THROW(generate_fit_dataset(3, {0.2}, 20000, 1), ConfigError);
    EXPECT_THROW(generate_fit_dataset(3, {0.0}, 20000, 1), ConfigError);
    EXPECT_THROW(generate_fit_dataset(3, {1e-2}, 9999, 1), ConfigError);
    EXPECT_THROW(generate_fit_dataset(4, {1e-2}, 20000, 1), ConfigError);
}

TEST(Dataset, ZeroErrorPointsAreDropped) {
    FitDataset data = generate_fit_dataset(7, {1e-4, 5e-2}, 10000, 1);
    ASSERT_EQ(data.dropped_p.size(), 1u);
    EXPECT_DOUBLE_EQ(data.dropped_p[0], 1e-4);
    EXPECT_EQ(data.rows.size(), 1u);
}

TEST(Dataset, CsvRoundTrip) {
    FitDataset data = generate_fit_dataset(3, log_grid(5e-3, 3e-2, 4), 20000, 2);
    std::stringstream ss;
    write_dataset_csv(ss, data);
    EXPECT_EQ(ss.str().substr(0, 27), "p,dfr,ler,stderr_ler,shots\n");
    auto samples = read_dataset_samples(ss);
    ASSERT_EQ(samples.size(), data.rows.size());
    for (std::size_t i = 0; i < samples.size(); i++) {
        EXPECT_NEAR(samples[i].first, data.rows[i].batch.dfr, 1e-9 * data.rows[i].batch.dfr);
        EXPECT_NEAR(samples[i].second, data.rows[i].batch.ler, 1e-9 * data.rows[i].batch.ler);
    }
}

TEST(Grid, LogSpacing) {
    auto g = parse_log_grid("1e-3:3e-2:8");
    ASSERT_EQ(g.size(), 8u);
    EXPECT_EQ(g.front(), 1e-3);
    EXPECT_EQ(g.back(), 3e-2);
    for (std::size_t i = 1; i + 1 < g.size(); i++) {
        EXPECT_NEAR(std::log10(g[i + 1] / g[i]), std::log10(g[i] / g[i - 1]), 1e-12);
    }
    EXPECT_EQ(parse_log_grid("0.01").size(), 1u);
    EXPECT_EQ(parse_log_grid("0.01,0.02,0.03").size(), 3u);
    EXPECT_EQ(parse_log_grid("1e-3:1e-2:1"), std::vector<double>{1e-3});
    EXPECT_THROW(parse_log_grid("1e-3:3e-2"), ConfigError);
    EXPECT_THROW(parse_log_grid("a:b:c"), ConfigError);
    EXPECT_THROW(parse_log_grid("1e-3:3e-2:0"), ConfigError);
    EXPECT_THROW(parse_log_grid(""), ConfigError);
}

}  // namespace
}  // namespace driftqec
