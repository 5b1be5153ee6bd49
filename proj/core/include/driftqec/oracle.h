#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftqec/layout.h"

namespace driftqec {

/// Which Pauli component of the noise is being decoded. X errors are seen by
/// the Z stabilizers and checked against logical Z, and vice versa.
enum class Sector { x_errors, z_errors };

/// Minimum-weight decoder for one sector of a code-capacity rotated code.
///
/// d = 3 uses a table built by enumerating all 2^9 error patterns. Larger
/// distances match defects on the sector's matching graph (one edge per data
/// qubit, singly-covered qubits attach to a shared boundary node): exhaustive
/// over pairings up to 10 defects, greedy nearest pair beyond that.
class SectorDecoder {
   public:
    SectorDecoder(const CodeLayout &layout, Sector sector);

    /// Syndrome bit i belongs to check i of this sector. Returns the data qubits
    /// to flip, sorted. Throws ConfigError when the syndrome length is wrong.
    std::vector<int> decode(std::span<const std::uint8_t> syndrome) const;

    /// Bitmask form used by the sampler: bit i of `syndrome` is check i, bit q
    /// of the result is data qubit q.
    std::uint64_t decode_mask(std::uint32_t syndrome) const;

    /// Syndrome produced by an error on the given data-qubit mask.
    std::uint32_t syndrome_of(std::uint64_t error_mask) const;

    std::size_t check_count() const {
        return check_masks_.size();
    }
    /// Logical operator this sector's residual is tested against.
    std::uint64_t logical_mask() const {
        return logical_mask_;
    }

   private:
    std::uint64_t match(std::uint32_t syndrome) const;
    std::uint64_t path_mask(int from, int to) const;

    std::vector<std::uint64_t> check_masks_;
    std::uint64_t logical_mask_ = 0;
    int num_data_ = 0;
    // d = 3: correction for every syndrome value.
    std::vector<std::uint64_t> table_;
    // d >= 5: all-pairs shortest paths over checks plus one boundary node
    // (index check_count()). pred_edge_[src][v] is the data qubit on the last
    // hop of the shortest path src -> v, pred_node_ the node before it.
    std::vector<std::vector<int>> dist_;
    std::vector<std::vector<int>> pred_edge_;
    std::vector<std::vector<int>> pred_node_;
};

/// Convenience wrapper that builds a decoder for one call.
std::vector<int> decode_lookup(const CodeLayout &layout, Sector sector, std::span<const std::uint8_t> syndrome);

struct ShotOutcome {
    int fired = 0;  // detectors that fired, out of N
    bool x_logical_flip = false;
    bool z_logical_flip = false;
    bool logical_error() const {
        return x_logical_flip || z_logical_flip;
    }
};

struct ShotBatch {
    std::uint64_t shots = 0;
    std::uint64_t fired_detectors = 0;
    std::uint64_t logical_errors = 0;
    double dfr = 0.0;
    double ler = 0.0;
    double stderr_ler = 0.0;
};

/// Single-round code-capacity simulator: i.i.d. X and Z flips on data qubits,
/// perfect syndrome extraction against an all-zeros reference frame.
class CodeCapacitySimulator {
   public:
    explicit CodeCapacitySimulator(CodeLayout layout);

    const CodeLayout &layout() const {
        return layout_;
    }
    const SectorDecoder &decoder(Sector sector) const {
        return sector == Sector::x_errors ? x_decoder_ : z_decoder_;
    }

    /// Evaluates one fixed error pattern (bit q = data qubit q).
    ShotOutcome run_shot(std::uint64_t x_errors, std::uint64_t z_errors) const;

    /// Shots are split into fixed-size chunks, each with its own derived seed,
    /// so the result does not depend on `threads`.
    ShotBatch sample(double p_x, double p_z, std::uint64_t shots, std::uint64_t seed, unsigned threads = 1) const;

   private:
    CodeLayout layout_;
    SectorDecoder x_decoder_;
    SectorDecoder z_decoder_;
};

ShotBatch sample_code_capacity(
    const CodeLayout &layout, double p_x, double p_z, std::uint64_t shots, std::uint64_t seed, unsigned threads = 1);

/// Exact logical failure probability of one sector for i.i.d. flips with
/// probability p, by summing over every error pattern. Only feasible for d = 3.
double exact_sector_failure(const CodeCapacitySimulator &sim, Sector sector, double p);

/// Exact probability that a shot with p_x = p_z = p has a logical error (d = 3).
double exact_code_capacity_ler(const CodeCapacitySimulator &sim, double p);

/// Exact expected detector fire rate for p_x = p_z = p (any d).
double exact_code_capacity_dfr(const CodeLayout &layout, double p);

struct DatasetRow {
    double p = 0.0;
    ShotBatch batch;
};

struct FitDataset {
    int d = 0;
    std::vector<DatasetRow> rows;
    std::vector<double> dropped_p;  // grid points that saw no logical error
};

/// One batch per grid point with p_x = p_z = p. Requires p in (0, 0.1] and at
/// least 10^4 shots per point.
FitDataset generate_fit_dataset(
    int d, const std::vector<double> &p_grid, std::uint64_t shots_per_point, std::uint64_t seed, unsigned threads = 1);

/// `lo:hi:n` log-spaced grid (n >= 1; n = 1 yields {lo}).
std::vector<double> parse_log_grid(const std::string &text);
std::vector<double> log_grid(double lo, double hi, int n);

/// CSV with header `p,dfr,ler,stderr_ler,shots`.
void write_dataset_csv(std::ostream &out, const FitDataset &dataset);

/// Reads the dfr and ler columns of a dataset CSV.
std::vector<std::pair<double, double>> read_dataset_samples(std::istream &in);

}  // namespace driftqec
