#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fedprice/aggregation.hpp"
#include "fedprice/privacy.hpp"

namespace fedprice {

struct TypeProfile {
    std::vector<double> alphas;

    TypeProfile() = default;
    explicit TypeProfile(std::vector<double> a) : alphas(std::move(a)) {
        if (alphas.empty()) throw std::domain_error("TypeProfile: at least one client");
    }
    std::size_t size() const { return alphas.size(); }
    double operator[](std::size_t i) const { return alphas[i]; }
};

struct GameParams {
    PrivacyParams privacy;
    LearningConfig learning;
    double sigma_min = 1e-6;
    double sigma_max = 1e6;
    double alpha_floor = 1e-4;

    GameParams(PrivacyParams p, LearningConfig l) : privacy(std::move(p)), learning(l) {}

    static GameParams defaults() {
        return GameParams(PrivacyParams::minimal(1.0, 1e-5), LearningConfig::make(1.0, 1.0, 30));
    }

    double cs() const { return privacy.c * privacy.s; }
    // clamp a raw type into the well-posed open interval
    double clamp_alpha(double a) const {
        if (a < alpha_floor) return alpha_floor;
        if (a > 1.0 - alpha_floor) return 1.0 - alpha_floor;
        return a;
    }
    TypeProfile clamp(const std::vector<double>& raw) const {
        std::vector<double> out(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) out[i] = clamp_alpha(raw[i]);
        return TypeProfile(std::move(out));
    }
};

// J_i = (1-alpha_i) * bound(Delta^MLE) + alpha_i * cS / sigma_i
double client_cost(double alpha_i, const NoiseProfile& sigma, std::size_t i,
                   const GameParams& params);

double social_cost(const TypeProfile& alphas, const NoiseProfile& sigma,
                   const GameParams& params);

struct CompleteSolution {
    NoiseProfile sigma;
    double residual = 0.0;    // max relative FOC residual
    bool boundary = false;    // some coordinate clamped at sigma bounds
    int iterations = 0;
};

// First-order-condition systems of the complete-information game.
// solve_*_complete return the unique solution; x0 only seeds the bracket walk.
CompleteSolution solve_ne_complete(const TypeProfile& alphas, const GameParams& params,
                                   const std::vector<double>* x0 = nullptr);
CompleteSolution solve_so_complete(const TypeProfile& alphas, const GameParams& params,
                                   const std::vector<double>* x0 = nullptr);

// Max relative residual of Eq.-9 (social=false) / Eq.-10 (social=true) at sigma,
// with optional per-client quadratic penalty coefficients (priced game).
double foc_residual_complete(const TypeProfile& alphas, const NoiseProfile& sigma,
                             const GameParams& params, bool social,
                             const std::vector<double>* beta = nullptr);

// Priced cost of client i: J_i + beta_i * ((N-1)/N)^2 sigma_i^2 + const.
double priced_client_cost(double alpha_i, const NoiseProfile& sigma, std::size_t i,
                          double beta_i, const GameParams& params);

// Damped Gauss-Seidel best-response dynamics of the penalty game. Each sweep
// solves every client's FOC on the penalty-stabilised branch (nearest upward
// crossing, log-damped steps). Converges to a fixed point of the priced FOCs.
CompleteSolution best_response_priced(const TypeProfile& alphas,
                                      const std::vector<double>& beta,
                                      const GameParams& params,
                                      const std::vector<double>& x0, int max_sweeps = 600);

struct EquilibriumResult {
    NoiseProfile sigma_ne;
    NoiseProfile sigma_so;
    double sc_ne = 0.0;
    double sc_opt = 0.0;
    double gamma = 1.0;
    double residual = 0.0;
    bool boundary = false;
};

EquilibriumResult price_of_anarchy(const TypeProfile& alphas, const GameParams& params);

}  // namespace fedprice
