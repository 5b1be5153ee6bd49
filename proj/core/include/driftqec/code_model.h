#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace driftqec {

/// log10 p_L = log_A + b log10 DFR, fitted at one code distance.
struct PowerLawFit {
    int d = 3;
    double log_A = 0.0;
    double b = 0.0;
    double sigma_logA = 0.0;
    double sigma_b = 0.0;
    int n_samples = 0;
    int n_excluded = 0;  // zero-DFR samples skipped by the fit
    double residual_rms = 0.0;

    double amplitude() const;
    /// Detectors per round at this distance, d^2 - 1.
    int detectors() const {
        return d * d - 1;
    }
};

/// Ordinary least squares on (log10 dfr, log10 ler). Standard errors come from
/// the OLS covariance with n - 2 degrees of freedom; residual_rms is the root
/// mean square log10 residual.
PowerLawFit fit_power_law(const std::vector<std::pair<double, double>> &samples, int d);

std::string fit_to_json(const PowerLawFit &fit);
PowerLawFit fit_from_json(const std::string &text);

struct PredictorConfig {
    std::uint32_t k = 1000;
    double alpha = 0.05;
    double multiplier = 0.0;  // -1 low bound, 0 median, +1 high bound
    double target_ler = 1e-3;

    void validate() const;
};

struct Prediction {
    double mean_dfr = 0.0;
    double best = 0.0;
    double low = 0.0;
    double high = 0.0;
    double used = 0.0;
    bool valid = false;
    bool low_confidence = false;  // mean_dfr was 0; floor prediction
};

/// z = Phi^-1(1 - alpha / 2).
double z_from_alpha(double alpha);

/// Interval in log space:
///   log10 best = log_A + b log10 x
///   h = z sqrt(sigma_logA^2 + (log10 x)^2 sigma_b^2)
///   low, high = 10^(log10 best -/+ h)
///   used = best + m (bound - best), bound = high for m > 0, low for m < 0.
/// A zero mean DFR is replaced by the single-fire floor 1 / (k N).
Prediction predict_ler(const PowerLawFit &fit, double mean_dfr, const PredictorConfig &config);

/// Inverse of the median curve, clamped to [0, 1].
double invert_ler_to_dfr(const PowerLawFit &fit, double ler);

}  // namespace driftqec
