#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedprice {

// Pricing scheme P_i = penalty_i - reward_i - q. Complete-information schemes
// carry per-client betas; incomplete-information schemes carry the
// per-reported-type pair (beta_low, beta_high) and the reward rates.
struct PricingScheme {
    enum class Mode { Complete, Incomplete };
    Mode mode = Mode::Complete;

    std::vector<double> betas;  // per-client (complete info)
    double beta_low = 0.0;      // beta^L (incomplete info)
    double beta_high = 0.0;     // beta^H
    double reward_low = 0.0;    // r^L
    double reward_high = 0.0;   // r^H
    double compensation = 0.0;  // q

    // calibration context, kept so experiments replay bit-exactly
    std::vector<double> sigma_star;  // sigma** the scheme was designed against
    std::uint64_t seed = 0;

    // diagnostics: the paper's printed closed forms, evaluated as-is
    std::vector<double> betas_printed;
    double q_printed = 0.0;

    static PricingScheme none() { return PricingScheme{}; }

    std::string serialize() const;
    static PricingScheme parse(const std::string& text);
};

}  // namespace fedprice
