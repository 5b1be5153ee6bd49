#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "driftqec/code_model.h"
#include "driftqec/drift.h"

namespace driftqec {

/// Ring of the k most recent per-cycle DFRs for one tile.
///
/// The running sum is kept in 2^-60 fixed point so that evicting an entry
/// removes exactly what was added: the mean never drifts over long runs and
/// does not depend on the order values arrived in.
class DfrBuffer {
   public:
    explicit DfrBuffer(std::uint32_t capacity);

    /// Throws ConfigError unless dfr is in [0, 1].
    void push(double dfr);
    void clear();

    /// Throws NumericalError on an empty buffer.
    double mean() const;

    std::uint32_t capacity() const {
        return capacity_;
    }
    std::uint32_t count() const {
        return count_;
    }
    bool saturated() const {
        return count_ == capacity_;
    }
    bool empty() const {
        return count_ == 0;
    }
    /// Held entries, oldest first.
    std::vector<double> entries() const;

   private:
    std::uint32_t capacity_;
    std::uint32_t count_ = 0;
    std::uint32_t head_ = 0;  // slot of the oldest entry
    std::vector<double> values_;
    __extension__ typedef unsigned __int128 Accumulator;
    std::vector<std::uint64_t> fixed_;
    Accumulator sum_ = 0;
};

/// Free-function spelling of DfrBuffer::push.
void push_dfr(DfrBuffer &buffer, double dfr);
double mean_dfr(const DfrBuffer &buffer);

/// Invalid until the buffer is saturated (warm-up). A partially filled buffer
/// still reports its partial-window estimate, but flagged invalid.
Prediction predict_tile(const DfrBuffer &buffer, const PowerLawFit &fit, const PredictorConfig &config);

/// Strict: used == target does not trigger.
bool detect_breach(const Prediction &prediction, double target_ler);

/// Mean |used - truth| over cycles with a valid prediction. The two series are
/// aligned by cycle. Throws NumericalError if no cycle is valid.
double evaluate_l1(std::span<const double> truth, std::span<const Prediction> predictions);

struct BreachReport {
    std::optional<std::int64_t> predicted_breach_cycle;
    std::optional<std::int64_t> true_breach_cycle;
    std::optional<std::int64_t> gap;  // true - predicted
    bool zealous = false;
};

/// First cycle (counted from 1) at which each series strictly exceeds the
/// target; predictions only count when valid.
BreachReport breach_gap(std::span<const double> truth, std::span<const Prediction> predictions, double target_ler);

/// Ground truth sampled once per cycle: value for cycle c (from 1) is
/// trace.at((c - 1 + offset) * cycle_time).
std::vector<double> per_cycle_truth(const LerTrace &trace, double cycle_time, std::uint64_t cycles, std::uint64_t offset = 0);

/// `cycle,tile,mean_dfr,best,low,high,used,valid,breach`
void write_prediction_log_header(std::ostream &out);
void write_prediction_log_row(
    std::ostream &out, std::uint64_t cycle, std::uint32_t tile, const Prediction &p, double target_ler);

}  // namespace driftqec
