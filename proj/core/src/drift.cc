#include "driftqec/drift.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <fmt/format.h>

#include "driftqec/errors.h"
#include "driftqec/seeding.h"

namespace driftqec {

namespace {

// Box-Muller on the portable uniform; std::normal_distribution differs
// between standard libraries.
double standard_normal(Rng &rng) {
    double u1 = 0.0;
    do {
        u1 = uniform01(rng);
    } while (u1 <= 0.0);
    double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint32_t poisson_small(double lambda, Rng &rng) {
    double u = uniform01(rng);
    double term = std::exp(-lambda);
    double cdf = term;
    std::uint32_t k = 0;
    while (u > cdf && k < 1000) {
        k++;
        term *= lambda / k;
        cdf += term;
    }
    return k;
}

}  // namespace

std::string_view channel_name(Channel c) {
    switch (c) {
        case Channel::single_qubit_gate:
            return "single_qubit_gate";
        case Channel::two_qubit_gate:
            return "two_qubit_gate";
        case Channel::measurement:
            return "measurement";
        case Channel::reset:
            return "reset";
        case Channel::data_decoherence:
            return "data_decoherence";
        case Channel::ancilla_decoherence:
            return "ancilla_decoherence";
    }
    return "unknown";
}

std::vector<ComponentId> tile_components(const CodeLayout &layout, std::uint32_t tile_id) {
    const auto n_data = static_cast<std::uint32_t>(layout.num_data());
    const auto n_anc = static_cast<std::uint32_t>(layout.detector_count());
    std::uint32_t n_edges = 0;
    for (const auto *set : {&layout.x_stabilizers, &layout.z_stabilizers}) {
        for (const auto &s : *set) {
            n_edges += static_cast<std::uint32_t>(s.size());
        }
    }
    std::vector<ComponentId> out;
    auto add = [&](Channel ch, std::uint32_t count) {
        for (std::uint32_t i = 0; i < count; i++) {
            out.push_back({tile_id, ch, i});
        }
    };
    add(Channel::single_qubit_gate, n_data + n_anc);
    add(Channel::two_qubit_gate, n_edges);
    add(Channel::measurement, n_anc);
    add(Channel::reset, n_anc);
    add(Channel::data_decoherence, n_data);
    add(Channel::ancilla_decoherence, n_anc);
    return out;
}

double PhysicalErrorConfig::mean_probability() const {
    if (entries.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (const auto &[id, p] : entries) {
        s += p;
    }
    return s / static_cast<double>(entries.size());
}

void SlowDriftModel::validate() const {
    if (!(clamp > 0.0 && clamp <= 1.0)) {
        throw ConfigError("clamp must be in (0, 1]");
    }
    if (baselines.size() != drift_constants.size()) {
        throw ConfigError("baseline and drift-constant maps must share keys");
    }
    auto it = drift_constants.begin();
    for (const auto &[id, p0] : baselines) {
        if (it->first != id) {
            throw ConfigError("baseline and drift-constant maps must share keys");
        }
        if (!(p0 > 0.0 && p0 < 1.0)) {
            throw ConfigError("baseline probabilities must be in (0, 1)");
        }
        if (!(it->second > 0.0)) {
            throw ConfigError("drift constants must be positive");
        }
        ++it;
    }
}

SlowDriftModel sample_slow_drift_model(std::uint64_t seed, const CodeLayout &layout, const SlowDriftParams &params) {
    if (!(params.p0_lo > 0.0 && params.p0_lo < params.p0_hi && params.p0_hi < 1.0)) {
        throw ConfigError(fmt::format("baseline range must satisfy 0 < lo < hi < 1 (got [{}, {}])", params.p0_lo,
                                      params.p0_hi));
    }
    if (!(params.sigma >= 0.0) || !std::isfinite(params.mu)) {
        throw ConfigError("lognormal parameters must have finite mu and sigma >= 0");
    }
    SlowDriftModel model;
    model.clamp = params.clamp;
    Rng base_rng = make_rng(seed, "drift.baseline", params.tile_id);
    Rng drift_rng = make_rng(seed, "drift.constant", params.tile_id);
    const double shared = std::exp(params.mu + params.sigma * standard_normal(drift_rng));
    for (const ComponentId &id : tile_components(layout, params.tile_id)) {
        model.baselines[id] = params.p0_lo + (params.p0_hi - params.p0_lo) * uniform01(base_rng);
        model.drift_constants[id] =
            params.shared_drift_constant ? shared : std::exp(params.mu + params.sigma * standard_normal(drift_rng));
    }
    model.validate();
    return model;
}

void BurstEvent::validate() const {
    if (!(duration >= 0.0)) {
        throw ConfigError("burst duration must be >= 0");
    }
    if (!(magnitude >= 1.0)) {
        throw ConfigError("burst magnitude must be >= 1");
    }
    if (!(recovery_constant > 0.0)) {
        throw ConfigError("burst recovery constant must be > 0");
    }
}

double BurstEvent::factor(double t) const {
    if (t < start) {
        return 1.0;
    }
    const double end = start + duration;
    if (t <= end) {
        return magnitude;
    }
    return 1.0 + (magnitude - 1.0) * std::exp(-(t - end) / recovery_constant);
}

PhysicalErrorConfig physical_rates_at(const SlowDriftModel &model, const std::vector<BurstEvent> &bursts, double t) {
    PhysicalErrorConfig out;
    for (const auto &[id, p0] : model.baselines) {
        double p = p0 * std::pow(10.0, t / model.drift_constants.at(id));
        for (const auto &b : bursts) {
            if (b.affected.contains(id)) {
                p *= b.factor(t);
            }
        }
        out.entries[id] = std::min(model.clamp, p);
    }
    return out;
}

void DfrTrace::validate() const {
    if (window_size < 1) {
        throw ConfigError("window size must be >= 1");
    }
    for (std::size_t i = 0; i < samples.size(); i++) {
        if (!(samples[i].dfr >= 0.0 && samples[i].dfr <= 1.0)) {
            throw ConfigError(fmt::format("DFR sample {} outside [0, 1]", i));
        }
        if (i > 0 && !(samples[i].time > samples[i - 1].time)) {
            throw ConfigError(fmt::format("DFR sample times must strictly increase (sample {})", i));
        }
    }
}

double DfrTrace::at(double t) const {
    if (samples.empty()) {
        throw ConfigError("empty DFR trace");
    }
    auto it = std::lower_bound(
        samples.begin(), samples.end(), t, [](const DfrSample &s, double v) { return s.time < v; });
    if (it == samples.end()) {
        return samples.back().dfr;
    }
    return it->dfr;
}

double window_rel_uncertainty(double p, std::uint64_t n) {
    if (p <= 0.0 || n == 0) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n)) / p;
}

DfrTrace import_dfr_trace(std::span<const RoundCount> rounds, double round_time, double max_rel_uncertainty) {
    if (rounds.empty()) {
        throw ConfigError("no rounds to import");
    }
    if (!(max_rel_uncertainty > 0.0 && max_rel_uncertainty < 1.0)) {
        throw ConfigError("relative uncertainty must be in (0, 1)");
    }
    if (!(round_time > 0.0)) {
        throw ConfigError("round time must be positive");
    }
    std::vector<double> frac(rounds.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < rounds.size(); i++) {
        if (rounds[i].total == 0 || rounds[i].fired > rounds[i].total) {
            throw ConfigError(fmt::format("round {} has invalid counts {}/{}", i, rounds[i].fired, rounds[i].total));
        }
        frac[i] = static_cast<double>(rounds[i].fired) / static_cast<double>(rounds[i].total);
        mean += frac[i];
    }
    mean /= static_cast<double>(rounds.size());
    if (mean <= 0.0) {
        throw NumericalError("trace uninformative at requested uncertainty");
    }
    const double u2 = max_rel_uncertainty * max_rel_uncertainty;
    // Smallest n with n > (1 - p) / (p u^2) at the stream mean.
    const auto n0 = static_cast<std::uint64_t>(std::floor((1.0 - mean) / (mean * u2))) + 1;

    DfrTrace trace;
    trace.cycle_time = round_time;
    trace.window_size = n0;
    std::size_t start = 0;
    while (start < rounds.size()) {
        std::size_t end = std::min(rounds.size(), start + static_cast<std::size_t>(n0));
        double sum = 0.0;
        for (std::size_t i = start; i < end; i++) {
            sum += frac[i];
        }
        auto ok = [&] {
            auto n = static_cast<std::uint64_t>(end - start);
            return window_rel_uncertainty(sum / static_cast<double>(n), n) < max_rel_uncertainty;
        };
        while (!ok() && end < rounds.size()) {
            sum += frac[end];
            end++;
        }
        if (!ok()) {
            break;
        }
        auto n = static_cast<std::uint64_t>(end - start);
        trace.samples.push_back({round_time * static_cast<double>(end), sum / static_cast<double>(n), n});
        start = end;
    }
    if (trace.samples.empty()) {
        throw NumericalError("trace uninformative at requested uncertainty");
    }
    return trace;
}

double volatile_stationary_sd(const VolatileTraceParams &params) {
    return params.volatility / std::sqrt(2.0 * params.reversion_rate);
}

DfrTrace synth_volatile_trace(std::uint64_t seed, const VolatileTraceParams &params) {
    if (!(params.base_dfr > 0.0 && params.base_dfr < 1.0)) {
        throw ConfigError("base DFR must be in (0, 1)");
    }
    if (!(params.duration > 0.0) || !(params.sample_interval > 0.0) || !(params.reversion_rate > 0.0) ||
        !(params.volatility >= 0.0) || !(params.jump_rate >= 0.0) || !(params.jump_scale >= 1.0) ||
        !(params.cycle_time > 0.0)) {
        throw ConfigError("invalid volatile trace parameters");
    }
    Rng walk = make_rng(seed, "volatile.walk");
    Rng jumps = make_rng(seed, "volatile.jumps");
    const double dt = params.sample_interval;
    const auto n = static_cast<std::size_t>(std::floor(params.duration / dt + 1e-9));
    const double centre = std::log(params.base_dfr);
    const double decay = std::exp(-params.reversion_rate * dt);
    const double step_sd = volatile_stationary_sd(params) * std::sqrt(1.0 - decay * decay);
    const double jump_log = std::log(params.jump_scale);
    const double ceiling = std::log(0.5);

    DfrTrace trace;
    trace.cycle_time = params.cycle_time;
    trace.window_size = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(dt / params.cycle_time)));
    double x = centre;
    for (std::size_t i = 0; i < n; i++) {
        x = centre + (x - centre) * decay + step_sd * standard_normal(walk);
        std::uint32_t k = poisson_small(params.jump_rate * dt, jumps);
        for (std::uint32_t j = 0; j < k; j++) {
            x += jump_log * (0.5 + uniform01(jumps));
        }
        x = std::min(x, ceiling);
        trace.samples.push_back({dt * static_cast<double>(i + 1), std::exp(x), trace.window_size});
    }
    return trace;
}

LerTrace::LerTrace(std::vector<LerSample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) {
        throw ConfigError("LER trace needs at least one sample");
    }
    for (std::size_t i = 0; i < samples_.size(); i++) {
        if (!(samples_[i].ler > 0.0 && samples_[i].ler <= 1.0)) {
            throw ConfigError(fmt::format("LER sample {} = {} outside (0, 1]", i, samples_[i].ler));
        }
        if (i > 0 && !(samples_[i].time > samples_[i - 1].time)) {
            throw ConfigError(fmt::format("LER sample times must strictly increase (sample {})", i));
        }
    }
}

double LerTrace::at(double t) const {
    if (samples_.empty()) {
        throw ConfigError("empty LER trace");
    }
    if (t <= samples_.front().time) {
        return samples_.front().ler;
    }
    if (t >= samples_.back().time) {
        return samples_.back().ler;
    }
    auto hi = std::upper_bound(
        samples_.begin(), samples_.end(), t, [](double v, const LerSample &s) { return v < s.time; });
    auto lo = hi - 1;
    double w = (t - lo->time) / (hi->time - lo->time);
    double la = std::log10(lo->ler);
    double lb = std::log10(hi->ler);
    return std::min(1.0, std::pow(10.0, la + w * (lb - la)));
}

LerTrace exponential_ler_trace(double p0, double tau, double duration, int n) {
    if (!(p0 > 0.0 && p0 <= 1.0) || !(tau > 0.0) || !(duration > 0.0) || n < 2) {
        throw ConfigError("exponential trace needs p0 in (0, 1], tau > 0, duration > 0, n >= 2");
    }
    std::vector<LerSample> s;
    for (int i = 0; i < n; i++) {
        double t = duration * i / (n - 1);
        s.push_back({t, std::min(1.0, p0 * std::pow(10.0, t / tau))});
    }
    return LerTrace(std::move(s));
}

LerTrace ler_trace_from_drift(
    const SlowDriftModel &model,
    const std::vector<BurstEvent> &bursts,
    double duration,
    int n,
    const std::function<double(const PhysicalErrorConfig &)> &ler_of_config) {
    if (!(duration > 0.0) || n < 2) {
        throw ConfigError("drift trace needs duration > 0 and n >= 2");
    }
    model.validate();
    for (const auto &b : bursts) {
        b.validate();
    }
    std::vector<LerSample> s;
    for (int i = 0; i < n; i++) {
        double t = duration * i / (n - 1);
        double ler = ler_of_config(physical_rates_at(model, bursts, t));
        s.push_back({t, std::clamp(ler, std::numeric_limits<double>::min(), 1.0)});
    }
    return LerTrace(std::move(s));
}

double fit_logical_drift_constant(const LerTrace &trace) {
    const auto &s = trace.samples();
    if (s.size() < 2) {
        throw ConfigError("need at least 2 samples to fit a drift constant");
    }
    const double t0 = s.front().time;
    const double y0 = std::log10(s.front().ler);
    double sxy = 0.0;
    double sxx = 0.0;
    for (const auto &p : s) {
        double x = p.time - t0;
        sxy += x * (std::log10(p.ler) - y0);
        sxx += x * x;
    }
    double slope = sxy / sxx;
    if (!(slope > 0.0)) {
        return kNoDrift;
    }
    return 1.0 / slope;
}

}  // namespace driftqec
