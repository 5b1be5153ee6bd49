#include "driftqec/predictor.h"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "driftqec/errors.h"

namespace driftqec {

namespace {

constexpr int kFixedBits = 60;

std::uint64_t to_fixed(double v) {
    return static_cast<std::uint64_t>(std::ldexp(v, kFixedBits));
}

}  // namespace

DfrBuffer::DfrBuffer(std::uint32_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
        throw ConfigError("buffer capacity must be >= 1");
    }
    values_.resize(capacity);
    fixed_.resize(capacity);
}

void DfrBuffer::push(double dfr) {
    if (!(dfr >= 0.0 && dfr <= 1.0)) {
        throw ConfigError(fmt::format("DFR {} outside [0, 1]", dfr));
    }
    const std::uint64_t q = to_fixed(dfr);
    std::uint32_t slot = 0;
    if (count_ == capacity_) {
        slot = head_;
        sum_ -= fixed_[slot];
        head_ = (head_ + 1) % capacity_;
    } else {
        slot = (head_ + count_) % capacity_;
        count_++;
    }
    values_[slot] = dfr;
    fixed_[slot] = q;
    sum_ += q;
}

void DfrBuffer::clear() {
    count_ = 0;
    head_ = 0;
    sum_ = 0;
}

double DfrBuffer::mean() const {
    if (count_ == 0) {
        throw NumericalError("mean of an empty DFR buffer");
    }
    // Integer division first keeps the quotient exact to within one unit.
    Accumulator quotient = sum_ / count_;
    Accumulator remainder = sum_ % count_;
    double m = std::ldexp(static_cast<double>(quotient), -kFixedBits) +
               std::ldexp(static_cast<double>(remainder) / count_, -kFixedBits);
    return m;
}

std::vector<double> DfrBuffer::entries() const {
    std::vector<double> out;
    out.reserve(count_);
    for (std::uint32_t i = 0; i < count_; i++) {
        out.push_back(values_[(head_ + i) % capacity_]);
    }
    return out;
}

void push_dfr(DfrBuffer &buffer, double dfr) {
    buffer.push(dfr);
}

double mean_dfr(const DfrBuffer &buffer) {
    return buffer.mean();
}

Prediction predict_tile(const DfrBuffer &buffer, const PowerLawFit &fit, const PredictorConfig &config) {
    if (buffer.empty()) {
        return Prediction{};
    }
    Prediction p = predict_ler(fit, buffer.mean(), config);
    p.valid = buffer.saturated();
    return p;
}

bool detect_breach(const Prediction &prediction, double target_ler) {
    return prediction.valid && prediction.used > target_ler;
}

double evaluate_l1(std::span<const double> truth, std::span<const Prediction> predictions) {
    if (truth.size() != predictions.size()) {
        throw ConfigError(fmt::format("truth has {} cycles, predictions {}", truth.size(), predictions.size()));
    }
    double total = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < truth.size(); i++) {
        if (predictions[i].valid) {
            total += std::abs(predictions[i].used - truth[i]);
            n++;
        }
    }
    if (n == 0) {
        throw NumericalError("no valid predictions to evaluate");
    }
    return total / static_cast<double>(n);
}

BreachReport breach_gap(std::span<const double> truth, std::span<const Prediction> predictions, double target_ler) {
    if (truth.size() != predictions.size()) {
        throw ConfigError(fmt::format("truth has {} cycles, predictions {}", truth.size(), predictions.size()));
    }
    BreachReport r;
    for (std::size_t i = 0; i < truth.size(); i++) {
        auto cycle = static_cast<std::int64_t>(i + 1);
        if (!r.true_breach_cycle && truth[i] > target_ler) {
            r.true_breach_cycle = cycle;
        }
        if (!r.predicted_breach_cycle && detect_breach(predictions[i], target_ler)) {
            r.predicted_breach_cycle = cycle;
        }
        if (r.true_breach_cycle && r.predicted_breach_cycle) {
            break;
        }
    }
    if (r.true_breach_cycle && r.predicted_breach_cycle) {
        r.gap = *r.true_breach_cycle - *r.predicted_breach_cycle;
        r.zealous = *r.gap > 0;
    }
    return r;
}

std::vector<double> per_cycle_truth(const LerTrace &trace, double cycle_time, std::uint64_t cycles, std::uint64_t offset) {
    std::vector<double> out(cycles);
    for (std::uint64_t c = 0; c < cycles; c++) {
        out[c] = trace.at(static_cast<double>(c + offset) * cycle_time);
    }
    return out;
}

void write_prediction_log_header(std::ostream &out) {
    out << "cycle,tile,mean_dfr,best,low,high,used,valid,breach\n";
}

void write_prediction_log_row(
    std::ostream &out, std::uint64_t cycle, std::uint32_t tile, const Prediction &p, double target_ler) {
    out << fmt::format(
        "{},{},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{},{}\n", cycle, tile, p.mean_dfr, p.best, p.low, p.high, p.used,
        p.valid ? 1 : 0, detect_breach(p, target_ler) ? 1 : 0);
}

}  // namespace driftqec
