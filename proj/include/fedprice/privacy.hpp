#pragma once

#include <cmath>
#include <stdexcept>

namespace fedprice {

// Gaussian-mechanism calibration. The mechanism guarantees (eps, delta)-DP
// for eps in (0,1) when sigma = c*S/eps with c >= sqrt(2 ln(1.25/delta)).

inline double min_noise_multiplier(double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::domain_error("min_noise_multiplier: delta must lie in (0,1)");
    return std::sqrt(2.0 * std::log(1.25 / delta));
}

struct PrivacyParams {
    double c;      // noise multiplier
    double s;      // sensitivity of the local training process
    double delta;  // DP failure probability

    PrivacyParams(double c_, double s_, double delta_) : c(c_), s(s_), delta(delta_) {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::domain_error("PrivacyParams: delta must lie in (0,1)");
        if (!(s > 0.0)) throw std::domain_error("PrivacyParams: sensitivity must be positive");
        if (!(c >= min_noise_multiplier(delta)))
            throw std::domain_error("PrivacyParams: c below sqrt(2 ln(1.25/delta))");
    }

    static PrivacyParams minimal(double s_, double delta_) {
        return PrivacyParams(min_noise_multiplier(delta_), s_, delta_);
    }
};

struct EpsilonBudget {
    double epsilon;

    explicit EpsilonBudget(double eps) : epsilon(eps) {
        if (!(eps > 0.0 && eps < 1.0))
            throw std::domain_error("EpsilonBudget: epsilon must lie in (0,1)");
    }
};

// sigma = c*S/eps
inline double sigma_for_epsilon(const PrivacyParams& p, const EpsilonBudget& eps) {
    return p.c * p.s / eps.epsilon;
}

// Privacy-loss bound cS/sigma; strictly decreasing in sigma.
inline double privacy_loss_bound(double sigma, const PrivacyParams& p) {
    if (!(sigma > 0.0)) throw std::domain_error("privacy_loss_bound: sigma must be positive");
    return p.c * p.s / sigma;
}

}  // namespace fedprice
