#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace fedprice {

using ParameterVector = std::vector<double>;

struct NoiseProfile {
    std::vector<double> sigmas;

    NoiseProfile() = default;
    explicit NoiseProfile(std::vector<double> s) : sigmas(std::move(s)) {
        if (sigmas.empty()) throw std::domain_error("NoiseProfile: at least one client");
        for (double v : sigmas)
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::domain_error("NoiseProfile: every sigma must be positive and finite");
    }
    std::size_t size() const { return sigmas.size(); }
    double operator[](std::size_t i) const { return sigmas[i]; }
};

struct LearningConfig {
    double l_smooth = 1.0;   // L_F
    double w0_dist = 1.0;    // ||w0 - w*||_2
    double step_size = 1.0;  // defaults to 1/L_F via make()
    int rounds = 30;         // T

    static LearningConfig make(double l_smooth, double w0_dist, int rounds) {
        if (!(l_smooth > 0.0)) throw std::domain_error("LearningConfig: L_F must be positive");
        if (!(w0_dist >= 0.0)) throw std::domain_error("LearningConfig: w0_dist must be >= 0");
        if (rounds < 1) throw std::domain_error("LearningConfig: rounds must be >= 1");
        LearningConfig c;
        c.l_smooth = l_smooth;
        c.w0_dist = w0_dist;
        c.step_size = 1.0 / l_smooth;
        c.rounds = rounds;
        return c;
    }

    double kappa() const { return 16.0 * w0_dist; }
};

// Coordinate-wise arithmetic mean of client parameters.
inline ParameterVector aggregate_mean(const std::vector<ParameterVector>& params) {
    if (params.empty()) throw std::invalid_argument("aggregate_mean: empty client list");
    const std::size_t d = params.front().size();
    ParameterVector out(d, 0.0);
    for (const auto& w : params) {
        if (w.size() != d) throw std::invalid_argument("aggregate_mean: dimension mismatch");
        for (std::size_t k = 0; k < d; ++k) out[k] += w[k];
    }
    for (double& v : out) v /= static_cast<double>(params.size());
    return out;
}

// Inverse-variance (MLE) weighted mean with weights sigma_i^{-2}.
inline ParameterVector aggregate_mle(const std::vector<ParameterVector>& params,
                                     const NoiseProfile& noise) {
    if (params.empty()) throw std::invalid_argument("aggregate_mle: empty client list");
    if (params.size() != noise.size())
        throw std::invalid_argument("aggregate_mle: params/noise length mismatch");
    const std::size_t d = params.front().size();
    ParameterVector out(d, 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].size() != d) throw std::invalid_argument("aggregate_mle: dimension mismatch");
        const double w = 1.0 / (noise[i] * noise[i]);
        wsum += w;
        for (std::size_t k = 0; k < d; ++k) out[k] += w * params[i][k];
    }
    for (double& v : out) v /= wsum;
    return out;
}

// Delta^MLE = (sum sigma_i^{-2})^{-1/2}
inline double delta_mle(const NoiseProfile& noise) {
    double h = 0.0;
    for (double s : noise.sigmas) h += 1.0 / (s * s);
    return 1.0 / std::sqrt(h);
}

// Standard deviation of the plain mean of independent noises.
inline double delta_mean(const NoiseProfile& noise) {
    double q = 0.0;
    for (double s : noise.sigmas) q += s * s;
    return std::sqrt(q) / static_cast<double>(noise.size());
}

// Error scale of MLE aggregation weighted by presumed variances while the
// actual noise is different: sqrt(sum a_i^2/p_i^4) / (sum 1/p_i^2).
inline double delta_incomplete(const NoiseProfile& actual, const NoiseProfile& presumed) {
    if (actual.size() != presumed.size())
        throw std::invalid_argument("delta_incomplete: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double p2 = presumed[i] * presumed[i];
        num += (actual[i] * actual[i]) / (p2 * p2);
        den += 1.0 / p2;
    }
    return std::sqrt(num) / den;
}

// Prop-1 style bound kappa * d * (1 + d/(2 L_F)); increasing in d, 0 at d=0.
inline double convergence_bound(double delta, const LearningConfig& cfg) {
    if (!(delta >= 0.0)) throw std::domain_error("convergence_bound: delta must be >= 0");
    return cfg.kappa() * delta * (1.0 + delta / (2.0 * cfg.l_smooth));
}

}  // namespace fedprice
