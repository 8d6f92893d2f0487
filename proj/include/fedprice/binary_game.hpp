#pragma once

#include <array>
#include <map>
#include <vector>

#include "fedprice/game.hpp"
#include "fedprice/pricing.hpp"

namespace fedprice {

struct BinaryTypeModel {
    double alpha_low;
    double alpha_high;
    double eta;  // probability of the low type
    int n_clients;

    BinaryTypeModel(double al, double ah, double eta_, int n)
        : alpha_low(al), alpha_high(ah), eta(eta_), n_clients(n) {
        if (!(0.0 <= al && al < ah && ah <= 1.0))
            throw std::domain_error("BinaryTypeModel: need 0 <= alpha_L < alpha_H <= 1");
        if (!(eta_ > 0.0 && eta_ < 1.0))
            throw std::domain_error("BinaryTypeModel: eta must lie in (0,1)");
        if (n < 2) throw std::domain_error("BinaryTypeModel: need at least two clients");
    }
};

// The paper's three symmetric reporting cases (Case 1 split by pooled value).
enum class ReportingCase { PoolLow, PoolHigh, Misreport, Truthful };

const char* to_string(ReportingCase c);

// Binomial(n, p) pmf over k = 0..n.
std::vector<double> binomial_pmf(int n, double p);

struct BneResult {
    ReportingCase reporting_case = ReportingCase::Truthful;
    double sigma_low = 0.0;
    double sigma_high = 0.0;
    double expected_cost_low = 0.0;   // full cost incl. pricing at the case solution
    double expected_cost_high = 0.0;
    double residual = 0.0;
    bool boundary = false;  // sigma clamped at the bounds (branch ran away)
};

// Expected social cost of the truthful game at type-contingent (sL, sH),
// expectation over the Binomial(N, eta) low-type count; transfers excluded.
double expected_sc_binary(double sigma_low, double sigma_high, const BinaryTypeModel& model,
                          const GameParams& params);

// Residuals of the reporting-case equation system at s = (sigma_L, sigma_H).
std::array<double, 2> case_residuals(ReportingCase c, double sigma_low, double sigma_high,
                                     const BinaryTypeModel& model, const PricingScheme& pricing,
                                     const GameParams& params);

// Solve a case's two-equation system (damped Newton from structural seeds;
// boundary branch is reported, never silently accepted).
BneResult solve_bne_case(ReportingCase c, const BinaryTypeModel& model,
                         const PricingScheme& pricing, const GameParams& params,
                         const std::array<double, 2>* seed = nullptr);

// Type-contingent socially optimal noise (stationary point of expected SC).
struct BinarySoResult {
    double sigma_low = 0.0;
    double sigma_high = 0.0;
    double residual = 0.0;
};
BinarySoResult solve_so_binary(const BinaryTypeModel& model, const GameParams& params);

// Expected cost of a single client of true type `alpha` reporting low/high with
// own noise `own_sigma`, while the other N-1 clients behave per `c` with the
// case strategy (sigma_low, sigma_high). Presumed variances follow reports.
double expected_cost_binary(double alpha, bool report_low, double own_sigma,
                            double sigma_low, double sigma_high, ReportingCase c,
                            const BinaryTypeModel& model, const PricingScheme& pricing,
                            const GameParams& params);

// Own-sigma best response inside expected_cost_binary (for deviation checks).
double best_deviation_sigma(double alpha, bool report_low, double sigma_low,
                            double sigma_high, ReportingCase c, const BinaryTypeModel& model,
                            const PricingScheme& pricing, const GameParams& params);

struct ReportingOutcome {
    ReportingCase chosen = ReportingCase::Truthful;
    bool stable = true;  // chosen case is a best response for both types
    std::map<ReportingCase, BneResult> cases;
    // margin of the chosen case vs the best alternative, per type (>= 0 when stable)
    double margin_low = 0.0;
    double margin_high = 0.0;
    // unilateral-deviation margins within the chosen case (diagnostic; the
    // equilibrium concept compares the symmetric cases)
    double unilateral_margin_low = 0.0;
    double unilateral_margin_high = 0.0;
};

// Solve every case, compare each type's expected cost, return the case that is
// simultaneously cheapest for both types (flagged unstable if none is).
ReportingOutcome best_reporting(const BinaryTypeModel& model, const PricingScheme& pricing,
                                const GameParams& params);

}  // namespace fedprice
