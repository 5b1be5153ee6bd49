#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "driftqec/layout.h"

namespace driftqec {

enum class Channel : std::uint8_t {
    single_qubit_gate,
    two_qubit_gate,
    measurement,
    reset,
    data_decoherence,
    ancilla_decoherence,
};

std::string_view channel_name(Channel c);

/// One noisy hardware element of a tile.
struct ComponentId {
    std::uint32_t tile_id = 0;
    Channel channel = Channel::single_qubit_gate;
    std::uint32_t index = 0;
    auto operator<=>(const ComponentId &) const = default;
};

/// Every component a distance-d tile exposes: one single-qubit gate per qubit,
/// one two-qubit gate per stabilizer/data incidence, measurement, reset and
/// decoherence per ancilla, decoherence per data qubit.
std::vector<ComponentId> tile_components(const CodeLayout &layout, std::uint32_t tile_id = 0);

struct PhysicalErrorConfig {
    std::map<ComponentId, double> entries;

    /// Arithmetic mean over components. This is the effective i.i.d. data error
    /// rate fed to the code-capacity oracle.
    double mean_probability() const;
};

struct SlowDriftModel {
    std::map<ComponentId, double> baselines;        // p_0
    std::map<ComponentId, double> drift_constants;  // P, seconds per decade
    double clamp = 0.5;

    /// Checks the model invariants; throws ConfigError.
    void validate() const;
};

struct SlowDriftParams {
    double p0_lo = 1e-4;
    double p0_hi = 1e-3;
    double mu = 0.0;  // of ln P
    double sigma = 0.0;
    double clamp = 0.5;
    /// One drift constant for the whole tile instead of one per component.
    bool shared_drift_constant = false;
    std::uint32_t tile_id = 0;
};

/// p_0 ~ U[lo, hi] and P ~ Lognormal(mu, sigma^2) per component.
SlowDriftModel sample_slow_drift_model(std::uint64_t seed, const CodeLayout &layout, const SlowDriftParams &params);

struct BurstEvent {
    double start = 0.0;
    double duration = 0.0;
    double magnitude = 1.0;
    std::set<ComponentId> affected;
    double recovery_constant = 1.0;

    void validate() const;
    /// magnitude inside [start, start + duration]; afterwards the excess decays
    /// as exp(-(t - start - duration) / recovery_constant); 1 before start.
    double factor(double t) const;
};

/// p_i(t) = min(clamp, p_0 * 10^(t / P) * prod(burst factors)).
PhysicalErrorConfig physical_rates_at(const SlowDriftModel &model, const std::vector<BurstEvent> &bursts, double t);

struct DfrSample {
    double time = 0.0;  // end of the averaging window, seconds
    double dfr = 0.0;
    std::uint64_t rounds = 0;  // rounds averaged into this sample
};

struct DfrTrace {
    double cycle_time = 0.0;
    std::vector<DfrSample> samples;
    std::uint64_t window_size = 1;  // minimum rounds per sample

    void validate() const;
    double duration() const {
        return samples.empty() ? 0.0 : samples.back().time;
    }
    /// Piecewise-constant lookup: the sample whose window covers t.
    double at(double t) const;
};

/// Per-round detector bits: fired of total detectors.
struct RoundCount {
    std::uint64_t fired = 0;
    std::uint64_t total = 0;
};

/// Averages rounds into windows whose relative standard error
/// sqrt(p(1-p)/n)/p is below max_rel_uncertainty. The window starts at the
/// size implied by the whole-stream mean and grows until the local mean also
/// satisfies the bound. Trailing rounds that never reach it are dropped.
DfrTrace import_dfr_trace(std::span<const RoundCount> rounds, double round_time, double max_rel_uncertainty);

/// Relative standard error of a window mean with n rounds; +inf when p = 0.
double window_rel_uncertainty(double p, std::uint64_t n);

struct VolatileTraceParams {
    double duration = 60.0;
    double base_dfr = 0.05;
    double jump_rate = 0.0;   // events per second
    double jump_scale = 3.0;  // multiplicative size of a typical jump
    double sample_interval = 0.01;
    double reversion_rate = 1.0;  // 1/s
    double volatility = 0.05;     // log-space diffusion per sqrt(s)
    double cycle_time = 3.3e-6;
};

/// Mean-reverting walk in ln(DFR) with upward Poisson jumps of size
/// ln(jump_scale) * U(0.5, 1.5).
DfrTrace synth_volatile_trace(std::uint64_t seed, const VolatileTraceParams &params);

/// Half-width of the no-jump stationary band in log space, in standard
/// deviations of the walk.
double volatile_stationary_sd(const VolatileTraceParams &params);

struct LerSample {
    double time = 0.0;
    double ler = 0.0;
};

/// Ground-truth logical error rate over time, log-linear between samples and
/// held constant outside them.
class LerTrace {
   public:
    LerTrace() = default;
    explicit LerTrace(std::vector<LerSample> samples);

    double at(double t) const;
    const std::vector<LerSample> &samples() const {
        return samples_;
    }
    double start_time() const {
        return samples_.front().time;
    }
    double end_time() const {
        return samples_.back().time;
    }
    bool empty() const {
        return samples_.empty();
    }

   private:
    std::vector<LerSample> samples_;
};

/// p_L(t) = p_L(0) 10^(t / tau) sampled at n points on [0, duration].
LerTrace exponential_ler_trace(double p0, double tau, double duration, int n);

/// Samples a drift model at n evenly spaced times and maps each physical error
/// configuration through `ler_of_config`.
LerTrace ler_trace_from_drift(
    const SlowDriftModel &model,
    const std::vector<BurstEvent> &bursts,
    double duration,
    int n,
    const std::function<double(const PhysicalErrorConfig &)> &ler_of_config);

inline constexpr double kNoDrift = std::numeric_limits<double>::infinity();

/// Least-squares tau in log10 p_L(t) = log10 p_L(t0) + (t - t0) / tau with the
/// intercept pinned to the first sample. Returns kNoDrift when slope <= 0.
double fit_logical_drift_constant(const LerTrace &trace);

}  // namespace driftqec
