#include "driftqec/layout.h"

#include <algorithm>

#include <gtest/gtest.h>

#include "driftqec/errors.h"

namespace driftqec {
namespace {

class LayoutTest : public ::testing::TestWithParam<int> {};

TEST_P(LayoutTest, Counts) {
    const int d = GetParam();
    CodeLayout c = build_rotated_code(d);
    EXPECT_EQ(c.num_data(), static_cast<std::size_t>(d * d));
    EXPECT_EQ(c.x_stabilizers.size(), static_cast<std::size_t>((d * d - 1) / 2));
    EXPECT_EQ(c.z_stabilizers.size(), static_cast<std::size_t>((d * d - 1) / 2));
    EXPECT_EQ(c.detector_count(), static_cast<std::size_t>(d * d - 1));
    EXPECT_EQ(c.ancilla_positions().size(), c.detector_count());
    EXPECT_EQ(c.logical_x.size(), static_cast<std::size_t>(d));
    EXPECT_EQ(c.logical_z.size(), static_cast<std::size_t>(d));
}

TEST_P(LayoutTest, StabilizersCommute) {
    CodeLayout c = build_rotated_code(GetParam());
    for (const auto &x : c.x_stabilizers) {
        for (const auto &z : c.z_stabilizers) {
            EXPECT_FALSE(odd_overlap(x, z));
        }
    }
}

TEST_P(LayoutTest, LogicalsCommuteWithStabilizersAndAnticommute) {
    CodeLayout c = build_rotated_code(GetParam());
    for (const auto &z : c.z_stabilizers) {
        EXPECT_FALSE(odd_overlap(c.logical_x, z));
    }
    for (const auto &x : c.x_stabilizers) {
        EXPECT_FALSE(odd_overlap(c.logical_z, x));
    }
    EXPECT_TRUE(odd_overlap(c.logical_x, c.logical_z));
}

TEST_P(LayoutTest, WeightsAreTwoOrFour) {
    const int d = GetParam();
    CodeLayout c = build_rotated_code(d);
    int weight_two = 0;
    for (const auto *set : {&c.x_stabilizers, &c.z_stabilizers}) {
        for (const auto &s : *set) {
            EXPECT_TRUE(s.size() == 2 || s.size() == 4);
            EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
            weight_two += s.size() == 2 ? 1 : 0;
        }
    }
    EXPECT_EQ(weight_two, 2 * (d - 1));
}

TEST_P(LayoutTest, EveryQubitIsCheckedBySomeStabilizerOfEachType) {
    CodeLayout c = build_rotated_code(GetParam());
    for (int q = 0; q < static_cast<int>(c.num_data()); q++) {
        auto touches = [q](const std::vector<std::vector<int>> &set) {
            return std::any_of(set.begin(), set.end(),
                               [q](const auto &s) { return std::find(s.begin(), s.end(), q) != s.end(); });
        };
        EXPECT_TRUE(touches(c.x_stabilizers));
        EXPECT_TRUE(touches(c.z_stabilizers));
    }
}

INSTANTIATE_TEST_SUITE_P(Distances, LayoutTest, ::testing::Values(3, 5, 7));

TEST(Layout, DataQubitIndexing) {
    CodeLayout c = build_rotated_code(5);
    for (int i = 0; i < 25; i++) {
        EXPECT_EQ(c.data_qubits[static_cast<std::size_t>(i)], (Coord{i / 5, i % 5}));
    }
}

TEST(Layout, RejectsBadDistances) {
    EXPECT_THROW(build_rotated_code(4), ConfigError);
    EXPECT_THROW(build_rotated_code(1), ConfigError);
    EXPECT_THROW(build_rotated_code(9), ConfigError);
    EXPECT_THROW(build_rotated_code(-3), ConfigError);
    try {
        check_distance(4);
        FAIL();
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("distance must be odd"), std::string::npos);
    }
}

}  // namespace
}  // namespace driftqec
