#include "driftqec/trace_io.h"

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "driftqec/errors.h"
#include "support/test_support.h"

namespace driftqec {
namespace {

TEST(DfrCsv, RoundTrip) {
    DfrTrace t;
    t.cycle_time = 3.3e-6;
    t.samples = {{0.01, 0.05, 1}, {0.02, 0.0625, 1}, {0.03, 0.125, 1}};
    std::stringstream ss;
    write_dfr_trace_csv(ss, t);
    EXPECT_EQ(ss.str().substr(0, 11), "time_s,dfr\n");
    DfrTrace r = read_dfr_trace_csv(ss, 3.3e-6);
    ASSERT_EQ(r.samples.size(), 3u);
    for (std::size_t i = 0; i < 3; i++) {
        EXPECT_EQ(r.samples[i].time, t.samples[i].time);
        EXPECT_EQ(r.samples[i].dfr, t.samples[i].dfr);
    }
}

TEST(DfrCsv, RejectsBadInput) {
    std::istringstream wrong_header("t,dfr\n0.1,0.1\n");
    EXPECT_THROW(read_dfr_trace_csv(wrong_header, 1e-6), ConfigError);
    std::istringstream bad_number("time_s,dfr\n0.1,abc\n");
    EXPECT_THROW(read_dfr_trace_csv(bad_number, 1e-6), ConfigError);
    std::istringstream out_of_range("time_s,dfr\n0.1,1.5\n");
    EXPECT_THROW(read_dfr_trace_csv(out_of_range, 1e-6), ConfigError);
    std::istringstream decreasing("time_s,dfr\n0.2,0.1\n0.1,0.1\n");
    EXPECT_THROW(read_dfr_trace_csv(decreasing, 1e-6), ConfigError);
    std::istringstream columns("time_s,dfr\n0.1,0.1,0.3\n");
    EXPECT_THROW(read_dfr_trace_csv(columns, 1e-6), ConfigError);
}

TEST(LerCsv, RoundTrip) {
    LerTrace t({{0.0, 1e-4}, {1.5, 3.25e-4}});
    std::stringstream ss;
    write_ler_trace_csv(ss, t);
    EXPECT_EQ(ss.str().substr(0, 11), "time_s,ler\n");
    LerTrace r = read_ler_trace_csv(ss);
    ASSERT_EQ(r.samples().size(), 2u);
    EXPECT_EQ(r.samples()[1].ler, 3.25e-4);
}

TEST(RoundCounts, CsvParsing) {
    std::istringstream in("round,fired_count,total_detectors\n0,1,8\n1,0,8\n2,8,8\n");
    auto r = read_round_counts_csv(in);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_EQ(r[2].fired, 8u);
    EXPECT_EQ(r[0].total, 8u);
    std::istringstream gap("round,fired_count,total_detectors\n0,1,8\n2,0,8\n");
    EXPECT_THROW(read_round_counts_csv(gap), ConfigError);
    std::istringstream too_many("round,fired_count,total_detectors\n0,9,8\n");
    EXPECT_THROW(read_round_counts_csv(too_many), ConfigError);
}

TEST(RoundCounts, BinaryRoundTripAndAutoDetect) {
    std::vector<RoundCount> rounds = {{1, 8}, {0, 8}, {3, 24}};
    auto dir = testing::scratch_dir("rounds");
    {
        std::ofstream out(dir / "r.bin", std::ios::binary);
        write_round_counts_binary(out, rounds);
    }
    auto back = read_round_counts_file((dir / "r.bin").string());
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2].fired, 3u);
    EXPECT_EQ(back[2].total, 24u);
    {
        std::ofstream out(dir / "r.csv");
        out << "round,fired_count,total_detectors\n0,1,8\n1,2,8\n";
    }
    EXPECT_EQ(read_round_counts_file((dir / "r.csv").string()).size(), 2u);
    EXPECT_THROW(read_round_counts_file((dir / "missing.bin").string()), ConfigError);
    std::istringstream truncated(std::string("DQECRND1\x01\x00", 10));
    EXPECT_THROW(read_round_counts_binary(truncated), ConfigError);
    std::istringstream not_magic("NOTMAGIC");
    EXPECT_THROW(read_round_counts_binary(not_magic), ConfigError);
}

}  // namespace
}  // namespace driftqec
