#include "fedprice/game.hpp"

#include <algorithm>
#include <cmath>

#include "fedprice/rootfind.hpp"

namespace fedprice {

namespace {

// A(H) = kappa * (1 + H^{-1/2}/L_F) * H^{-3/2}
double a_of_h(double h, double kappa, double lf) {
    return kappa * (1.0 + 1.0 / (std::sqrt(h) * lf)) * std::pow(h, -1.5);
}

double precision_sum(const NoiseProfile& sigma) {
    double h = 0.0;
    for (double s : sigma.sigmas) h += 1.0 / (s * s);
    return h;
}

}  // namespace

double client_cost(double alpha_i, const NoiseProfile& sigma, std::size_t i,
                   const GameParams& params) {
    if (i >= sigma.size()) throw std::out_of_range("client_cost: index");
    const double d = delta_mle(sigma);
    return (1.0 - alpha_i) * convergence_bound(d, params.learning) +
           alpha_i * params.cs() / sigma[i];
}

double social_cost(const TypeProfile& alphas, const NoiseProfile& sigma,
                   const GameParams& params) {
    if (alphas.size() != sigma.size())
        throw std::invalid_argument("social_cost: type/noise length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        total += client_cost(alphas[i], sigma, i, params);
    return total;
}

double foc_residual_complete(const TypeProfile& alphas, const NoiseProfile& sigma,
                             const GameParams& params, bool social,
                             const std::vector<double>* beta) {
    const std::size_t n = alphas.size();
    const double h = precision_sum(sigma);
    const double a = a_of_h(h, params.learning.kappa(), params.learning.l_smooth);
    double wsum = 0.0;
    for (double al : alphas.alphas) wsum += 1.0 - al;
    const double pf = n > 1 ? ((n - 1.0) / n) * ((n - 1.0) / n) : 0.0;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = social ? wsum : (1.0 - alphas[i]);
        double lhs = w * a;
        if (beta) lhs += 2.0 * (*beta)[i] * pf * std::pow(sigma[i], 4);
        const double rhs = alphas[i] * params.cs() * sigma[i];
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
    return worst;
}

namespace {

CompleteSolution solve_complete_impl(const TypeProfile& alphas, const GameParams& params,
                                     bool social, const std::vector<double>* x0) {
    const std::size_t n = alphas.size();
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();

    double wsum = 0.0;
    for (double al : alphas.alphas) {
        if (!(al > 0.0 && al < 1.0))
            throw std::domain_error("solve_complete: types must lie strictly in (0,1)");
        wsum += 1.0 - al;
    }

    // At a solution sigma_i = A(H) w_i / (alpha_i cS), so
    // H = sum sigma_i^{-2} = K / A(H)^2 with K below. H*A(H)^2 is strictly
    // decreasing, so psi has exactly one root (Prop. 2's uniqueness).
    double k_const = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = social ? wsum : (1.0 - alphas[i]);
        const double t = alphas[i] * cs / w;
        k_const += t * t;
    }
    auto psi = [&](double h) {
        const double root_h = std::sqrt(h);
        const double term = kappa * (1.0 + 1.0 / (root_h * lf)) / h;
        return term * term - k_const;  // = H*A(H)^2 - K
    };

    // Seed the bracket from x0 (multi-start probes walk from different seeds
    // to the same unique root) and expand geometrically to a sign change.
    double h0 = 1.0;
    if (x0 && x0->size() == n) {
        double h = 0.0;
        for (double s : *x0) {
            const double sc = std::clamp(s, params.sigma_min, params.sigma_max);
            h += 1.0 / (sc * sc);
        }
        h0 = h;
    }
    double lo = h0, hi = h0;
    double flo = psi(lo), fhi = flo;
    for (int k = 0; k < 500 && flo <= 0.0; ++k) {
        lo /= 4.0;
        flo = psi(lo);
    }
    for (int k = 0; k < 500 && fhi >= 0.0; ++k) {
        hi *= 4.0;
        fhi = psi(hi);
    }
    const double h_star = bisect_log(psi, lo, hi);
    const double a_star = a_of_h(h_star, kappa, lf);

    CompleteSolution sol;
    std::vector<double> sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = social ? wsum : (1.0 - alphas[i]);
        double s = a_star * w / (alphas[i] * cs);
        if (s <= params.sigma_min) {
            s = params.sigma_min;
            sol.boundary = true;
        } else if (s >= params.sigma_max) {
            s = params.sigma_max;
            sol.boundary = true;
        }
        sigma[i] = s;
    }
    sol.sigma = NoiseProfile(std::move(sigma));
    sol.residual = foc_residual_complete(alphas, sol.sigma, params, social);
    sol.iterations = 1;
    if (!sol.boundary && sol.residual > 1e-9)
        throw solver_error("solve_complete: residual above tolerance", sol.sigma.sigmas,
                           sol.residual);
    return sol;
}

}  // namespace

CompleteSolution solve_ne_complete(const TypeProfile& alphas, const GameParams& params,
                                   const std::vector<double>* x0) {
    return solve_complete_impl(alphas, params, false, x0);
}

CompleteSolution solve_so_complete(const TypeProfile& alphas, const GameParams& params,
                                   const std::vector<double>* x0) {
    return solve_complete_impl(alphas, params, true, x0);
}

double priced_client_cost(double alpha_i, const NoiseProfile& sigma, std::size_t i,
                          double beta_i, const GameParams& params) {
    const std::size_t n = sigma.size();
    const double pf = n > 1 ? ((n - 1.0) / n) * ((n - 1.0) / n) : 0.0;
    return client_cost(alpha_i, sigma, i, params) + beta_i * pf * sigma[i] * sigma[i];
}

CompleteSolution best_response_priced(const TypeProfile& alphas,
                                      const std::vector<double>& beta,
                                      const GameParams& params,
                                      const std::vector<double>& x0, int max_sweeps) {
    const std::size_t n = alphas.size();
    if (beta.size() != n || x0.size() != n)
        throw std::invalid_argument("best_response_priced: size mismatch");
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    const double pf = n > 1 ? ((n - 1.0) / n) * ((n - 1.0) / n) : 0.0;
    const double max_log_step = std::log(2.0);

    std::vector<double> sig(n);
    for (std::size_t i = 0; i < n; ++i)
        sig[i] = std::clamp(x0[i], params.sigma_min, params.sigma_max);

    CompleteSolution sol;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double h_rest = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) h_rest += 1.0 / (sig[j] * sig[j]);
            const double w = 1.0 - alphas[i];
            const double b = beta[i];
            auto g = [&](double s) {
                const double h = h_rest + 1.0 / (s * s);
                return w * a_of_h(h, kappa, lf) + 2.0 * b * pf * s * s * s * s -
                       alphas[i] * cs * s;
            };
            // candidate roots: upward crossings (local minima of the priced cost)
            auto roots = scan_roots(g, params.sigma_min, params.sigma_max);
            const double lcur = std::log(sig[i]);
            double target = -1.0;
            double best_dist = 1e300;
            // include a refined bracket around the current iterate so a root
            // sitting between scan points is never missed
            {
                const double lo = sig[i] / 1.06, hi = sig[i] * 1.06;
                const double glo = g(lo), ghi = g(hi);
                if (glo < 0.0 && ghi > 0.0) {
                    const double r = refine_bracket(g, lo, hi);
                    target = r;
                    best_dist = std::abs(std::log(r) - lcur);
                }
            }
            for (const auto& r : roots) {
                if (!r.upward) continue;
                const double d = std::abs(std::log(r.x) - lcur);
                if (d < best_dist) {
                    best_dist = d;
                    target = r.x;
                }
            }
            double next;
            if (target > 0.0) {
                const double step = std::clamp(std::log(target) - lcur, -max_log_step,
                                               max_log_step);
                next = std::exp(lcur + step);
            } else {
                next = std::min(params.sigma_max, sig[i] * 32.0);  // quartic regains a root
            }
            max_change = std::max(max_change, std::abs(next - sig[i]) / next);
            sig[i] = next;
        }
        sol.iterations = sweep + 1;
        if (max_change < 1e-13) break;
    }
    sol.sigma = NoiseProfile(sig);
    sol.residual = foc_residual_complete(alphas, sol.sigma, params, false, &beta);
    for (double s : sig)
        if (s <= params.sigma_min * (1 + 1e-12) || s >= params.sigma_max * (1 - 1e-12))
            sol.boundary = true;
    return sol;
}

EquilibriumResult price_of_anarchy(const TypeProfile& alphas, const GameParams& params) {
    CompleteSolution ne = solve_ne_complete(alphas, params);
    CompleteSolution so = solve_so_complete(alphas, params);
    EquilibriumResult r;
    r.sigma_ne = ne.sigma;
    r.sigma_so = so.sigma;
    r.sc_ne = social_cost(alphas, ne.sigma, params);
    r.sc_opt = social_cost(alphas, so.sigma, params);
    r.gamma = r.sc_ne / r.sc_opt;
    r.residual = std::max(ne.residual, so.residual);
    r.boundary = ne.boundary || so.boundary;
    if (r.gamma < 1.0 - 1e-9)
        throw solver_error("price_of_anarchy: gamma below 1", ne.sigma.sigmas, r.gamma);
    return r;
}

}  // namespace fedprice
