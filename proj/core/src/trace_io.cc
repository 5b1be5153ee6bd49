#include "driftqec/trace_io.h"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "driftqec/errors.h"

namespace driftqec {

namespace {

constexpr std::array<char, 8> kRoundMagic = {'D', 'Q', 'E', 'C', 'R', 'N', 'D', '1'};

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    return out;
}

void strip_cr(std::string &line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

/// Reads a two-or-more column numeric CSV with an exact header.
std::vector<std::vector<double>> read_numeric_csv(std::istream &in, const std::string &expected_header) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("CSV is empty; expected header '" + expected_header + "'");
    }
    strip_cr(line);
    if (line != expected_header) {
        throw ConfigError("CSV header '" + line + "' does not match '" + expected_header + "'");
    }
    const std::size_t width = split_csv(expected_header).size();
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        strip_cr(line);
        if (line.empty()) {
            continue;
        }
        auto cells = split_csv(line);
        if (cells.size() != width) {
            throw ConfigError(fmt::format("line {}: expected {} fields, got {}", line_no, width, cells.size()));
        }
        std::vector<double> row;
        for (const auto &c : cells) {
            std::size_t used = 0;
            try {
                row.push_back(std::stod(c, &used));
            } catch (const std::logic_error &) {
                used = 0;
            }
            if (used != c.size() || c.empty()) {
                throw ConfigError(fmt::format("line {}: '{}' is not a number", line_no, c));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

void write_dfr_trace_csv(std::ostream &out, const DfrTrace &trace) {
    out << "time_s,dfr\n";
    for (const auto &s : trace.samples) {
        out << fmt::format("{:.12g},{:.12g}\n", s.time, s.dfr);
    }
}

DfrTrace read_dfr_trace_csv(std::istream &in, double cycle_time) {
    DfrTrace trace;
    trace.cycle_time = cycle_time;
    for (const auto &row : read_numeric_csv(in, "time_s,dfr")) {
        trace.samples.push_back({row[0], row[1], 1});
    }
    if (trace.samples.empty()) {
        throw ConfigError("DFR trace has no samples");
    }
    trace.validate();
    return trace;
}

void write_ler_trace_csv(std::ostream &out, const LerTrace &trace) {
    out << "time_s,ler\n";
    for (const auto &s : trace.samples()) {
        out << fmt::format("{:.12g},{:.12g}\n", s.time, s.ler);
    }
}

LerTrace read_ler_trace_csv(std::istream &in) {
    std::vector<LerSample> s;
    for (const auto &row : read_numeric_csv(in, "time_s,ler")) {
        s.push_back({row[0], row[1]});
    }
    return LerTrace(std::move(s));
}

std::vector<RoundCount> read_round_counts_csv(std::istream &in) {
    std::vector<RoundCount> out;
    std::uint64_t expected = 0;
    for (const auto &row : read_numeric_csv(in, "round,fired_count,total_detectors")) {
        for (double v : row) {
            if (v < 0.0 || v != std::floor(v)) {
                throw ConfigError("round counts must be non-negative integers");
            }
        }
        if (static_cast<std::uint64_t>(row[0]) != expected) {
            throw ConfigError(fmt::format("round {} out of sequence (expected {})", row[0], expected));
        }
        if (row[1] > row[2]) {
            throw ConfigError(fmt::format("round {} fires {} of {} detectors", row[0], row[1], row[2]));
        }
        expected++;
        out.push_back({static_cast<std::uint64_t>(row[1]), static_cast<std::uint64_t>(row[2])});
    }
    return out;
}

std::vector<RoundCount> read_round_counts_binary(std::istream &in) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kRoundMagic) {
        throw ConfigError("binary round file lacks the DQECRND1 magic");
    }
    std::vector<RoundCount> out;
    std::array<unsigned char, 8> rec{};
    while (in.read(reinterpret_cast<char *>(rec.data()), rec.size())) {
        auto le32 = [&](std::size_t at) {
            return static_cast<std::uint32_t>(rec[at]) | static_cast<std::uint32_t>(rec[at + 1]) << 8 |
                   static_cast<std::uint32_t>(rec[at + 2]) << 16 | static_cast<std::uint32_t>(rec[at + 3]) << 24;
        };
        out.push_back({le32(0), le32(4)});
    }
    if (in.gcount() != 0) {
        throw ConfigError("binary round file ends mid-record");
    }
    return out;
}

void write_round_counts_binary(std::ostream &out, const std::vector<RoundCount> &rounds) {
    out.write(kRoundMagic.data(), kRoundMagic.size());
    for (const auto &r : rounds) {
        std::array<unsigned char, 8> rec{};
        for (int i = 0; i < 4; i++) {
            rec[static_cast<std::size_t>(i)] = static_cast<unsigned char>(r.fired >> (8 * i));
            rec[static_cast<std::size_t>(4 + i)] = static_cast<unsigned char>(r.total >> (8 * i));
        }
        out.write(reinterpret_cast<const char *>(rec.data()), rec.size());
    }
}

std::vector<RoundCount> read_round_counts_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    bool binary = in.gcount() == 8 && head == kRoundMagic;
    in.clear();
    in.seekg(0);
    return binary ? read_round_counts_binary(in) : read_round_counts_csv(in);
}

}  // namespace driftqec
