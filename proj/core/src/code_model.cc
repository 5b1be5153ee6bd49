#include "driftqec/code_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "driftqec/errors.h"

namespace driftqec {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

double clamp_unit(double v) {
    if (!(v > kTiny)) {
        return kTiny;
    }
    return std::min(1.0, v);
}

}  // namespace

double PowerLawFit::amplitude() const {
    return std::pow(10.0, log_A);
}

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>> &samples, int d) {
    if (d < 3 || d % 2 == 0) {
        throw ConfigError("distance must be odd and >= 3");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    int excluded = 0;
    for (const auto &[dfr, ler] : samples) {
        if (!(dfr >= 0.0 && dfr <= 1.0)) {
            throw ConfigError(fmt::format("sample DFR {} outside [0, 1]", dfr));
        }
        if (!(ler > 0.0 && ler < 1.0)) {
            throw ConfigError(fmt::format("sample LER {} outside (0, 1)", ler));
        }
        if (dfr == 0.0) {
            excluded++;
            continue;
        }
        xs.push_back(std::log10(dfr));
        ys.push_back(std::log10(ler));
    }
    const auto n = static_cast<double>(xs.size());
    if (xs.size() < 3) {
        throw NumericalError(fmt::format("insufficient samples: {} usable, need at least 3", xs.size()));
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 1e-300)) {
        throw NumericalError("degenerate design: all sample DFRs are equal");
    }
    PowerLawFit fit;
    fit.d = d;
    fit.b = sxy / sxx;
    fit.log_A = my - fit.b * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); i++) {
        double r = ys[i] - (fit.log_A + fit.b * xs[i]);
        rss += r * r;
    }
    const double s2 = rss / (n - 2.0);
    fit.sigma_b = std::sqrt(s2 / sxx);
    fit.sigma_logA = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    fit.n_samples = static_cast<int>(xs.size());
    fit.n_excluded = excluded;
    fit.residual_rms = std::sqrt(rss / n);
    return fit;
}

std::string fit_to_json(const PowerLawFit &fit) {
    nlohmann::ordered_json j;
    j["d"] = fit.d;
    j["log_A"] = fit.log_A;
    j["b"] = fit.b;
    j["sigma_logA"] = fit.sigma_logA;
    j["sigma_b"] = fit.sigma_b;
    j["n_samples"] = fit.n_samples;
    j["residual_rms"] = fit.residual_rms;
    return j.dump(2) + "\n";
}

PowerLawFit fit_from_json(const std::string &text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    }
    PowerLawFit fit;
    try {
        fit.d = j.at("d").get<int>();
        fit.log_A = j.at("log_A").get<double>();
        fit.b = j.at("b").get<double>();
        fit.sigma_logA = j.value("sigma_logA", 0.0);
        fit.sigma_b = j.value("sigma_b", 0.0);
        fit.n_samples = j.value("n_samples", 3);
        fit.residual_rms = j.value("residual_rms", 0.0);
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(std::string("fit JSON: ") + e.what());
    }
    if (fit.d < 3 || fit.d % 2 == 0) {
        throw ConfigError("fit JSON: d must be odd and >= 3");
    }
    if (fit.sigma_logA < 0.0 || fit.sigma_b < 0.0) {
        throw ConfigError("fit JSON: standard errors must be >= 0");
    }
    return fit;
}

void PredictorConfig::validate() const {
    if (k < 1) {
        throw ConfigError("buffer size k must be >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError("alpha must be in (0, 1)");
    }
    if (!(multiplier >= -1.0 && multiplier <= 1.0)) {
        throw ConfigError("interval multiplier must be in [-1, 1]");
    }
    if (!(target_ler > 0.0 && target_ler <= 1.0)) {
        throw ConfigError("target LER must be in (0, 1]");
    }
}

double z_from_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ConfigError(fmt::format("alpha must be in (0, 1) (got {})", alpha));
    }
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, 1.0 - alpha / 2.0);
}

Prediction predict_ler(const PowerLawFit &fit, double mean_dfr, const PredictorConfig &config) {
    if (!(mean_dfr >= 0.0 && mean_dfr <= 1.0)) {
        throw ConfigError(fmt::format("mean DFR {} outside [0, 1]", mean_dfr));
    }
    Prediction p;
    p.mean_dfr = mean_dfr;
    p.valid = true;
    double x = mean_dfr;
    if (x == 0.0) {
        // All-zero window: one fired detector out of the whole buffer.
        x = 1.0 / (static_cast<double>(config.k) * fit.detectors());
        p.low_confidence = true;
    }
    const double lx = std::log10(x);
    const double centre = fit.log_A + fit.b * lx;
    const double h =
        z_from_alpha(config.alpha) * std::sqrt(fit.sigma_logA * fit.sigma_logA + lx * lx * fit.sigma_b * fit.sigma_b);
    const double best = std::pow(10.0, centre);
    const double low = std::pow(10.0, centre - h);
    const double high = std::pow(10.0, centre + h);
    const double m = config.multiplier;
    double used = best;
    if (m > 0.0) {
        used = best + m * (high - best);
    } else if (m < 0.0) {
        used = best - m * (low - best);
    }
    p.best = clamp_unit(best);
    p.low = clamp_unit(low);
    p.high = clamp_unit(high);
    p.used = clamp_unit(used);
    return p;
}

double invert_ler_to_dfr(const PowerLawFit &fit, double ler) {
    if (fit.b == 0.0) {
        throw NumericalError("cannot invert a fit with zero exponent");
    }
    if (!(ler > 0.0 && ler <= 1.0)) {
        throw ConfigError(fmt::format("LER {} outside (0, 1]", ler));
    }
    double dfr = std::pow(10.0, (std::log10(ler) - fit.log_A) / fit.b);
    return std::clamp(dfr, 0.0, 1.0);
}

}  // namespace driftqec
