#pragma once

// Conjugate Normal model of a batter's latent average with known
// observation noise.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>

#include "chase/document.hpp"

namespace chase {

struct NormalBelief {
    double mean = 35.0;
    double variance = 100.0;

    void validate() const {
        if (!(variance > 0.0) || !std::isfinite(mean)) throw std::invalid_argument("belief variance must be positive");
    }
};

struct ObservationModel {
    double observation_variance = 225.0;  // 15 runs standard deviation

    void validate() const {
        if (!(observation_variance > 0.0)) throw std::invalid_argument("observation_variance must be positive");
    }
};

/// Precisions add; the mean is the precision-weighted average of prior mean and score.
inline NormalBelief updateBelief(const NormalBelief& prior, double score, const ObservationModel& obs) {
    prior.validate();
    obs.validate();
    const double priorPrecision = 1.0 / prior.variance;
    const double obsPrecision = 1.0 / obs.observation_variance;
    const double precision = priorPrecision + obsPrecision;
    return {(priorPrecision * prior.mean + obsPrecision * score) / precision, 1.0 / precision};
}

/// Sequential fold of updateBelief in the given order.
inline NormalBelief updateBeliefBatch(const NormalBelief& prior, std::span<const double> scores,
                                      const ObservationModel& obs) {
    NormalBelief b = prior;
    for (double x : scores) b = updateBelief(b, x, obs);
    return b;
}

/// Closed-form n-observation posterior: precision tau0 + n tau, mean
/// (tau0 mu0 + tau sum(x)) / (tau0 + n tau).
inline NormalBelief updateBeliefClosedForm(const NormalBelief& prior, std::span<const double> scores,
                                           const ObservationModel& obs) {
    prior.validate();
    obs.validate();
    double sum = 0.0;
    for (double x : scores) sum += x;
    const double priorPrecision = 1.0 / prior.variance;
    const double obsPrecision = 1.0 / obs.observation_variance;
    const double precision = priorPrecision + static_cast<double>(scores.size()) * obsPrecision;
    return {(priorPrecision * prior.mean + obsPrecision * sum) / precision, 1.0 / precision};
}

struct Predictive {
    double mean = 0.0;
    double variance = 0.0;
};

inline Predictive posteriorPredictive(const NormalBelief& belief, const ObservationModel& obs) {
    return {belief.mean, belief.variance + obs.observation_variance};
}

/// Standard normal quantile. Acklam's rational approximation (relative error
/// below 1.2e-9) followed by one Halley step on erfc, which brings the error
/// to around 1e-15 across (0, 1).
inline double normalQuantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile probability must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double low = 0.02425;
    double x = 0.0;
    if (p < low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Central interval holding `mass` of the belief.
inline Interval credibleInterval(const NormalBelief& belief, double mass) {
    if (!(mass > 0.0 && mass < 1.0)) throw std::invalid_argument("mass must lie in (0, 1)");
    const double half = normalQuantile(0.5 + mass / 2.0) * std::sqrt(belief.variance);
    return {belief.mean - half, belief.mean + half};
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

struct BeliefSnapshot {
    std::string player_id;
    NormalBelief belief;
    std::uint64_t observations_count = 0;
};

inline json beliefSnapshotToJson(const BeliefSnapshot& s) {
    json doc = makeDocument("player_belief");
    doc["player_id"] = s.player_id;
    doc["mean"] = s.belief.mean;
    doc["variance"] = s.belief.variance;
    doc["observations_count"] = s.observations_count;
    return doc;
}

inline BeliefSnapshot beliefSnapshotFromJson(const json& doc) {
    requireDocument(doc, "player_belief");
    BeliefSnapshot s;
    s.player_id = doc.at("player_id").get<std::string>();
    s.belief = {doc.at("mean").get<double>(), doc.at("variance").get<double>()};
    s.belief.validate();
    s.observations_count = doc.at("observations_count").get<std::uint64_t>();
    return s;
}

}  // namespace chase
