#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "driftqec/errors.h"
#include "driftqec/oracle.h"
#include "driftqec/seeding.h"

namespace driftqec {

namespace {

constexpr std::uint64_t kChunkShots = 1 << 14;

struct ChunkTotals {
    std::uint64_t fired = 0;
    std::uint64_t logical = 0;
};

std::uint64_t sample_mask(int n, double p, Rng &rng) {
    std::uint64_t m = 0;
    if (p <= 0.0) {
        return m;
    }
    for (int q = 0; q < n; q++) {
        if (uniform01(rng) < p) {
            m |= std::uint64_t{1} << q;
        }
    }
    return m;
}

}  // namespace

CodeCapacitySimulator::CodeCapacitySimulator(CodeLayout layout)
    : layout_(std::move(layout)), x_decoder_(layout_, Sector::x_errors), z_decoder_(layout_, Sector::z_errors) {
}

ShotOutcome CodeCapacitySimulator::run_shot(std::uint64_t x_errors, std::uint64_t z_errors) const {
    ShotOutcome out;
    std::uint32_t sx = x_decoder_.syndrome_of(x_errors);
    std::uint32_t sz = z_decoder_.syndrome_of(z_errors);
    out.fired = std::popcount(sx) + std::popcount(sz);
    std::uint64_t rx = x_errors ^ x_decoder_.decode_mask(sx);
    std::uint64_t rz = z_errors ^ z_decoder_.decode_mask(sz);
    out.x_logical_flip = std::popcount(rx & x_decoder_.logical_mask()) & 1;
    out.z_logical_flip = std::popcount(rz & z_decoder_.logical_mask()) & 1;
    return out;
}

ShotBatch CodeCapacitySimulator::sample(
    double p_x, double p_z, std::uint64_t shots, std::uint64_t seed, unsigned threads) const {
    if (!(p_x >= 0.0 && p_x < 0.5) || !(p_z >= 0.0 && p_z < 0.5)) {
        throw ConfigError("error probabilities must be in [0, 0.5)");
    }
    if (shots == 0) {
        throw ConfigError("shots must be >= 1");
    }
    const std::uint64_t chunks = (shots + kChunkShots - 1) / kChunkShots;
    const int n = static_cast<int>(layout_.num_data());
    std::vector<ChunkTotals> totals(chunks);
    auto run_chunk = [&](std::uint64_t c) {
        Rng rng(derive_seed(seed, "oracle.shots", c));
        std::uint64_t begin = c * kChunkShots;
        std::uint64_t end = std::min(shots, begin + kChunkShots);
        ChunkTotals t;
        for (std::uint64_t s = begin; s < end; s++) {
            std::uint64_t ex = sample_mask(n, p_x, rng);
            std::uint64_t ez = sample_mask(n, p_z, rng);
            ShotOutcome o = run_shot(ex, ez);
            t.fired += static_cast<std::uint64_t>(o.fired);
            t.logical += o.logical_error() ? 1 : 0;
        }
        totals[c] = t;
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));
    if (threads == 1) {
        for (std::uint64_t c = 0; c < chunks; c++) {
            run_chunk(c);
        }
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; w++) {
            pool.emplace_back([&, w] {
                for (std::uint64_t c = w; c < chunks; c += threads) {
                    run_chunk(c);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }

    ShotBatch batch;
    batch.shots = shots;
    for (const auto &t : totals) {
        batch.fired_detectors += t.fired;
        batch.logical_errors += t.logical;
    }
    const double n_det = static_cast<double>(layout_.detector_count());
    batch.dfr = static_cast<double>(batch.fired_detectors) / (n_det * static_cast<double>(shots));
    batch.ler = static_cast<double>(batch.logical_errors) / static_cast<double>(shots);
    batch.stderr_ler = std::sqrt(batch.ler * (1.0 - batch.ler) / static_cast<double>(shots));
    return batch;
}

ShotBatch sample_code_capacity(
    const CodeLayout &layout, double p_x, double p_z, std::uint64_t shots, std::uint64_t seed, unsigned threads) {
    return CodeCapacitySimulator(layout).sample(p_x, p_z, shots, seed, threads);
}

double exact_sector_failure(const CodeCapacitySimulator &sim, Sector sector, double p) {
    const int n = static_cast<int>(sim.layout().num_data());
    if (sim.layout().d != 3) {
        throw ConfigError("exact enumeration is limited to d = 3");
    }
    const SectorDecoder &dec = sim.decoder(sector);
    // Group by weight so each power of p is computed once.
    std::vector<std::uint64_t> failing_by_weight(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint64_t e = 0; e < (std::uint64_t{1} << n); e++) {
        std::uint64_t residual = e ^ dec.decode_mask(dec.syndrome_of(e));
        if (std::popcount(residual & dec.logical_mask()) & 1) {
            failing_by_weight[static_cast<std::size_t>(std::popcount(e))]++;
        }
    }
    double total = 0.0;
    for (int w = 0; w <= n; w++) {
        total += static_cast<double>(failing_by_weight[static_cast<std::size_t>(w)]) * std::pow(p, w) *
                 std::pow(1.0 - p, n - w);
    }
    return total;
}

double exact_code_capacity_ler(const CodeCapacitySimulator &sim, double p) {
    double fx = exact_sector_failure(sim, Sector::x_errors, p);
    double fz = exact_sector_failure(sim, Sector::z_errors, p);
    return 1.0 - (1.0 - fx) * (1.0 - fz);
}

double exact_code_capacity_dfr(const CodeLayout &layout, double p) {
    // A check fires when an odd number of its w qubits flipped:
    // (1 - (1 - 2p)^w) / 2.
    double fired = 0.0;
    for (const auto *set : {&layout.x_stabilizers, &layout.z_stabilizers}) {
        for (const auto &s : *set) {
            fired += 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, static_cast<double>(s.size())));
        }
    }
    return fired / static_cast<double>(layout.detector_count());
}

FitDataset generate_fit_dataset(
    int d, const std::vector<double> &p_grid, std::uint64_t shots_per_point, std::uint64_t seed, unsigned threads) {
    if (p_grid.empty()) {
        throw ConfigError("probability grid is empty");
    }
    if (shots_per_point < 10'000) {
        throw ConfigError("need at least 10^4 shots per grid point");
    }
    for (double p : p_grid) {
        if (!(p > 0.0 && p <= 0.1)) {
            throw ConfigError(fmt::format("grid probability {} outside (0, 0.1]", p));
        }
    }
    CodeCapacitySimulator sim(build_rotated_code(d));
    FitDataset out;
    out.d = d;
    for (std::size_t i = 0; i < p_grid.size(); i++) {
        double p = p_grid[i];
        ShotBatch b = sim.sample(p, p, shots_per_point, derive_seed(seed, "oracle.point", i), threads);
        if (b.logical_errors == 0) {
            out.dropped_p.push_back(p);
            continue;
        }
        out.rows.push_back({p, b});
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (n < 1) {
        throw ConfigError("grid needs at least one point");
    }
    if (!(lo > 0.0) || !(hi >= lo)) {
        throw ConfigError("grid bounds must satisfy 0 < lo <= hi");
    }
    std::vector<double> out;
    if (n == 1) {
        out.push_back(lo);
        return out;
    }
    double a = std::log10(lo);
    double b = std::log10(hi);
    for (int i = 0; i < n; i++) {
        out.push_back(std::pow(10.0, a + (b - a) * i / (n - 1)));
    }
    // Endpoints exactly as given.
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> parse_log_grid(const std::string &text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        parts.push_back(item);
    }
    try {
        if (parts.size() == 3) {
            std::size_t used = 0;
            int n = std::stoi(parts[2], &used);
            if (used != parts[2].size()) {
                throw ConfigError("bad count");
            }
            return log_grid(std::stod(parts[0]), std::stod(parts[1]), n);
        }
        if (parts.size() == 1) {
            // Comma-separated explicit list.
            std::vector<double> out;
            std::stringstream ls(text);
            while (std::getline(ls, item, ',')) {
                out.push_back(std::stod(item));
            }
            return out;
        }
    } catch (const std::logic_error &) {
    }
    throw ConfigError("probability grid must be lo:hi:n or a comma-separated list (got '" + text + "')");
}

void write_dataset_csv(std::ostream &out, const FitDataset &dataset) {
    out << "p,dfr,ler,stderr_ler,shots\n";
    for (const auto &row : dataset.rows) {
        out << fmt::format(
            "{:.10g},{:.10g},{:.10g},{:.10g},{}\n", row.p, row.batch.dfr, row.batch.ler, row.batch.stderr_ler,
            row.batch.shots);
    }
}

std::vector<std::pair<double, double>> read_dataset_samples(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("dataset is empty");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::vector<std::string> header;
    {
        std::stringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            header.push_back(cell);
        }
    }
    auto col = [&](const std::string &name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw ConfigError("dataset header lacks column '" + name + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t dfr_col = col("dfr");
    const std::size_t ler_col = col("ler");
    std::vector<std::pair<double, double>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != header.size()) {
            throw ConfigError(fmt::format("dataset line {} has {} fields, expected {}", line_no, cells.size(),
                                          header.size()));
        }
        try {
            out.emplace_back(std::stod(cells[dfr_col]), std::stod(cells[ler_col]));
        } catch (const std::logic_error &) {
            throw ConfigError(fmt::format("dataset line {} is not numeric", line_no));
        }
    }
    return out;
}

}  // namespace driftqec
