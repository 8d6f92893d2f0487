#include "fedprice/binary_game.hpp"

#include <algorithm>
#include <cmath>

#include "fedprice/rootfind.hpp"

namespace fedprice {

const char* to_string(ReportingCase c) {
    switch (c) {
        case ReportingCase::PoolLow: return "pool_low";
        case ReportingCase::PoolHigh: return "pool_high";
        case ReportingCase::Misreport: return "misreport";
        case ReportingCase::Truthful: return "truthful";
    }
    return "?";
}

std::vector<double> binomial_pmf(int n, double p) {
    std::vector<double> out(n + 1);
    const double lp = std::log(p), lq = std::log1p(-p);
    for (int k = 0; k <= n; ++k) {
        const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        out[k] = std::exp(lc + k * lp + (n - k) * lq);
    }
    return out;
}

namespace {

// (1 + X^{-1/2}/L_F) X^{-3/2}
double g_of_x(double x, double lf) {
    return (1.0 + 1.0 / (std::sqrt(x) * lf)) * std::pow(x, -1.5);
}

struct CaseTerms {
    double marginal_low;   // d(expected accuracy bound)/d(own sigma) for the low type
    double marginal_high;  // same for the high type
    double beta_low;       // penalty coefficient applied to the low type in this case
    double beta_high;
};

// Accuracy marginals of the four reporting cases (lemma equation left sides).
CaseTerms case_terms(ReportingCase c, double sl, double sh, const BinaryTypeModel& m,
                     const PricingScheme& pr, const GameParams& params) {
    const int n_cl = m.n_clients;
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const auto pn = binomial_pmf(n_cl - 1, m.eta);
    const double al = m.alpha_low, ah = m.alpha_high;

    CaseTerms t{};
    switch (c) {
        case ReportingCase::Truthful: {
            double suml = 0.0, sumh = 0.0;
            for (int n = 0; n < n_cl; ++n) {
                const double x1 = (n + 1) / (sl * sl) + (n_cl - 1 - n) / (sh * sh);
                const double x2 = n / (sl * sl) + (n_cl - n) / (sh * sh);
                suml += pn[n] * g_of_x(x1, lf);
                sumh += pn[n] * g_of_x(x2, lf);
            }
            t.marginal_low = (1.0 - al) * kappa * suml / (sl * sl * sl);
            t.marginal_high = (1.0 - ah) * kappa * sumh / (sh * sh * sh);
            t.beta_low = pr.beta_low;
            t.beta_high = pr.beta_high;
            break;
        }
        case ReportingCase::Misreport: {
            double suml = 0.0, sumh = 0.0;
            for (int n = 0; n < n_cl; ++n) {
                const double s1 = (n + 1) * sl * sl / std::pow(sh, 4) +
                                  (n_cl - 1 - n) * sh * sh / std::pow(sl, 4);
                const double b1 = (n + 1) / (sh * sh) + (n_cl - 1 - n) / (sl * sl);
                const double s2 = n * sl * sl / std::pow(sh, 4) +
                                  (n_cl - n) * sh * sh / std::pow(sl, 4);
                const double b2 = n / (sh * sh) + (n_cl - n) / (sl * sl);
                suml += pn[n] * (1.0 / (std::sqrt(s1) * b1) + 1.0 / (lf * b1 * b1));
                sumh += pn[n] * (1.0 / (std::sqrt(s2) * b2) + 1.0 / (lf * b2 * b2));
            }
            t.marginal_low = (1.0 - al) * kappa * sl / std::pow(sh, 4) * suml;
            t.marginal_high = (1.0 - ah) * kappa * sh / std::pow(sl, 4) * sumh;
            // a low type reports high and is priced with beta^H, and vice versa
            t.beta_low = pr.beta_high;
            t.beta_high = pr.beta_low;
            break;
        }
        case ReportingCase::PoolLow:
        case ReportingCase::PoolHigh: {
            double suml = 0.0, sumh = 0.0;
            for (int n = 0; n < n_cl; ++n) {
                const double s1 = (n + 1) * sl * sl + (n_cl - 1 - n) * sh * sh;
                const double s2 = n * sl * sl + (n_cl - n) * sh * sh;
                suml += pn[n] / std::sqrt(s1);
                sumh += pn[n] / std::sqrt(s2);
            }
            const double nn = static_cast<double>(n_cl);
            t.marginal_low = (1.0 - al) * kappa * (sl / nn * suml + sl / (nn * nn * lf));
            t.marginal_high = (1.0 - ah) * kappa * (sh / nn * sumh + sh / (nn * nn * lf));
            const double b = (c == ReportingCase::PoolLow) ? pr.beta_low : pr.beta_high;
            t.beta_low = b;
            t.beta_high = b;
            break;
        }
    }
    return t;
}

}  // namespace

double expected_sc_binary(double sl, double sh, const BinaryTypeModel& m,
                          const GameParams& params) {
    const int n_cl = m.n_clients;
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    const auto pk = binomial_pmf(n_cl, m.eta);
    double total = 0.0;
    for (int k = 0; k <= n_cl; ++k) {
        const double x = k / (sl * sl) + (n_cl - k) / (sh * sh);
        const double d = 1.0 / std::sqrt(x);
        const double w = k * (1.0 - m.alpha_low) + (n_cl - k) * (1.0 - m.alpha_high);
        const double acc = kappa * w * d * (1.0 + d / (2.0 * lf));
        const double priv = k * m.alpha_low * cs / sl + (n_cl - k) * m.alpha_high * cs / sh;
        total += pk[k] * (acc + priv);
    }
    return total;
}

std::array<double, 2> case_residuals(ReportingCase c, double sl, double sh,
                                     const BinaryTypeModel& m, const PricingScheme& pr,
                                     const GameParams& params) {
    const double nn = static_cast<double>(m.n_clients);
    const double pf = ((nn - 1.0) / nn) * ((nn - 1.0) / nn);
    const double cs = params.cs();
    const CaseTerms t = case_terms(c, sl, sh, m, pr, params);
    // equations: marginal + 2 beta pf sigma = alpha cS / sigma^2, in relative form
    const double rl =
        (t.marginal_low + 2.0 * t.beta_low * pf * sl) * sl * sl / (m.alpha_low * cs) - 1.0;
    const double rh =
        (t.marginal_high + 2.0 * t.beta_high * pf * sh) * sh * sh / (m.alpha_high * cs) - 1.0;
    return {rl, rh};
}

namespace {

std::array<double, 2> mixed_complete_seed(const BinaryTypeModel& m, const GameParams& params,
                                          bool social) {
    const int n_cl = m.n_clients;
    int k = static_cast<int>(std::lround(m.eta * n_cl));
    k = std::clamp(k, 1, n_cl - 1);
    std::vector<double> al(n_cl, m.alpha_high);
    for (int i = 0; i < k; ++i) al[i] = params.clamp_alpha(m.alpha_low);
    for (int i = k; i < n_cl; ++i) al[i] = params.clamp_alpha(m.alpha_high);
    const TypeProfile prof(al);
    const CompleteSolution s =
        social ? solve_so_complete(prof, params) : solve_ne_complete(prof, params);
    return {s.sigma[0], s.sigma[n_cl - 1]};
}

bool newton_on_case(ReportingCase c, const BinaryTypeModel& m, const PricingScheme& pr,
                    const GameParams& params, double x[2], double tol) {
    auto f = [&](const double* xx, double* rr) {
        const auto r = case_residuals(c, xx[0], xx[1], m, pr, params);
        rr[0] = r[0];
        rr[1] = r[1];
    };
    return newton2(f, x, tol);
}

}  // namespace

BneResult solve_bne_case(ReportingCase c, const BinaryTypeModel& m, const PricingScheme& pr,
                         const GameParams& params, const std::array<double, 2>* seed) {
    constexpr double kTol = 1e-10;  // relative; spec asks <= 1e-8
    std::vector<std::array<double, 2>> seeds;
    if (seed) seeds.push_back(*seed);
    seeds.push_back(mixed_complete_seed(m, params, false));
    seeds.push_back(mixed_complete_seed(m, params, true));

    BneResult out;
    out.reporting_case = c;
    for (const auto& s0 : seeds) {
        double x[2] = {s0[0], s0[1]};
        if (newton_on_case(c, m, pr, params, x, kTol) && x[0] > params.sigma_min &&
            x[0] < params.sigma_max && x[1] > params.sigma_min && x[1] < params.sigma_max) {
            const auto r = case_residuals(c, x[0], x[1], m, pr, params);
            out.sigma_low = x[0];
            out.sigma_high = x[1];
            out.residual = std::max(std::abs(r[0]), std::abs(r[1]));
            out.boundary = false;
            return out;
        }
    }

    // Interior branch lost (fold): pin the runaway coordinate at the bound and
    // solve the other equation; accepted only when the bound truly binds
    // (the pinned type's equation still pushes outward).
    for (int pin_high = 1; pin_high >= 0; --pin_high) {
        const double pinned = params.sigma_max;
        auto other_eq = [&](double s) {
            const double sl = pin_high ? s : pinned;
            const double sh = pin_high ? pinned : s;
            const auto r = case_residuals(c, sl, sh, m, pr, params);
            return pin_high ? r[0] : r[1];
        };
        const auto roots = scan_roots(other_eq, params.sigma_min, params.sigma_max);
        if (roots.empty()) continue;
        // nearest root to the structural seed
        const auto s0 = seeds.back();
        const double ref = pin_high ? s0[0] : s0[1];
        double best = roots.front().x;
        for (const auto& r : roots)
            if (std::abs(std::log(r.x / ref)) < std::abs(std::log(best / ref))) best = r.x;
        const double sl = pin_high ? best : pinned;
        const double sh = pin_high ? pinned : best;
        const auto r = case_residuals(c, sl, sh, m, pr, params);
        const double pinned_res = pin_high ? r[1] : r[0];
        if (pinned_res < 0.0) {  // marginal benefit of more noise at the bound
            out.sigma_low = sl;
            out.sigma_high = sh;
            out.residual = std::abs(pin_high ? r[0] : r[1]);
            out.boundary = true;
            return out;
        }
    }
    throw solver_error("solve_bne_case: no interior or boundary solution found",
                       {seeds.back()[0], seeds.back()[1]}, 1.0);
}

BinarySoResult solve_so_binary(const BinaryTypeModel& m, const GameParams& params) {
    const int n_cl = m.n_clients;
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    const auto pk = binomial_pmf(n_cl, m.eta);

    auto focs = [&](const double* x, double* r) {
        const double sl = x[0], sh = x[1];
        double suml = 0.0, sumh = 0.0;
        for (int k = 0; k <= n_cl; ++k) {
            const double xx = k / (sl * sl) + (n_cl - k) / (sh * sh);
            const double w = k * (1.0 - m.alpha_low) + (n_cl - k) * (1.0 - m.alpha_high);
            const double g = g_of_x(xx, lf);
            if (k > 0) suml += pk[k] * k * w * g;
            if (k < n_cl) sumh += pk[k] * (n_cl - k) * w * g;
        }
        r[0] = kappa * suml / (sl * m.alpha_low * cs * n_cl * m.eta) - 1.0;
        r[1] = kappa * sumh / (sh * m.alpha_high * cs * n_cl * (1.0 - m.eta)) - 1.0;
    };

    auto seed = mixed_complete_seed(m, params, true);
    double x[2] = {seed[0], seed[1]};
    bool ok = newton2(focs, x, 1e-12);
    if (!ok) {
        // coordinate descent on the expected social cost, then retry Newton
        double sl = seed[0], sh = seed[1];
        for (int round = 0; round < 40; ++round) {
            sl = golden_min_log(
                [&](double s) { return expected_sc_binary(s, sh, m, params); },
                sl / 16.0, sl * 16.0);
            sh = golden_min_log(
                [&](double s) { return expected_sc_binary(sl, s, m, params); },
                sh / 16.0, sh * 16.0);
        }
        x[0] = sl;
        x[1] = sh;
        ok = newton2(focs, x, 1e-12);
        if (!ok)
            throw solver_error("solve_so_binary: stationarity not reached", {x[0], x[1]}, 1.0);
    }
    double r[2];
    focs(x, r);
    return {x[0], x[1], std::max(std::abs(r[0]), std::abs(r[1]))};
}

double expected_cost_binary(double alpha, bool report_low, double own_sigma, double sl,
                            double sh, ReportingCase c, const BinaryTypeModel& m,
                            const PricingScheme& pr, const GameParams& params) {
    if (!(own_sigma > 0.0)) throw std::domain_error("expected_cost_binary: sigma must be > 0");
    const int n_cl = m.n_clients;
    const double nn = static_cast<double>(n_cl);
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    const auto pn = binomial_pmf(n_cl - 1, m.eta);
    const auto pN = binomial_pmf(n_cl, m.eta);

    // per-case behaviour of the other clients: actual noise by type, presumed
    // noise by their report, and the count of low reports among them
    double act_l = sl, act_h = sh;
    double pre_l, pre_h;  // presumed sigma of a low-typed / high-typed other
    auto others_low_reports = [&](int n_low_typed) {
        switch (c) {
            case ReportingCase::Truthful: return n_low_typed;
            case ReportingCase::Misreport: return (n_cl - 1) - n_low_typed;
            case ReportingCase::PoolLow: return n_cl - 1;
            case ReportingCase::PoolHigh: return 0;
        }
        return 0;
    };
    switch (c) {
        case ReportingCase::Truthful: pre_l = sl; pre_h = sh; break;
        case ReportingCase::Misreport: pre_l = sh; pre_h = sl; break;
        case ReportingCase::PoolLow: pre_l = sl; pre_h = sl; break;
        case ReportingCase::PoolHigh: pre_l = sh; pre_h = sh; break;
    }
    const double own_pre = report_low ? sl : sh;

    double acc = 0.0, reward_factor = 0.0;
    const double own_num = own_sigma * own_sigma / std::pow(own_pre, 4);
    const double own_den = 1.0 / (own_pre * own_pre);
    for (int n = 0; n <= n_cl - 1; ++n) {
        const double num = n * act_l * act_l / std::pow(pre_l, 4) +
                           (n_cl - 1 - n) * act_h * act_h / std::pow(pre_h, 4) + own_num;
        const double den =
            n / (pre_l * pre_l) + (n_cl - 1 - n) / (pre_h * pre_h) + own_den;
        const double d = std::sqrt(num) / den;
        acc += pn[n] * d * (1.0 + d / (2.0 * lf));
        const int nhat = others_low_reports(n) + (report_low ? 1 : 0);
        reward_factor += pn[n] * pN[nhat];
    }
    acc *= (1.0 - alpha) * kappa;

    const double pf = ((nn - 1.0) / nn) * ((nn - 1.0) / nn);
    const double beta = report_low ? pr.beta_low : pr.beta_high;
    const double e_others_var =
        (nn - 1.0) * (m.eta * sl * sl + (1.0 - m.eta) * sh * sh) / (nn * nn);
    const double penalty = beta * (pf * own_sigma * own_sigma + e_others_var);
    const double reward = (report_low ? pr.reward_low : pr.reward_high) * reward_factor;

    return acc + alpha * cs / own_sigma + penalty - reward - pr.compensation;
}

double best_deviation_sigma(double alpha, bool report_low, double sl, double sh,
                            ReportingCase c, const BinaryTypeModel& m,
                            const PricingScheme& pr, const GameParams& params) {
    auto f = [&](double s) {
        return expected_cost_binary(alpha, report_low, s, sl, sh, c, m, pr, params);
    };
    const int points = 481;
    double best_x = sl, best_f = f(sl);
    const double lr = std::log(params.sigma_max / params.sigma_min);
    int best_k = -1;
    for (int k = 0; k < points; ++k) {
        const double x = params.sigma_min * std::exp(lr * k / (points - 1));
        const double fx = f(x);
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
            best_k = k;
        }
    }
    if (best_k > 0 && best_k < points - 1) {
        const double lo = params.sigma_min * std::exp(lr * (best_k - 1) / (points - 1));
        const double hi = params.sigma_min * std::exp(lr * (best_k + 1) / (points - 1));
        best_x = golden_min_log(f, lo, hi);
    }
    return best_x;
}

ReportingOutcome best_reporting(const BinaryTypeModel& m, const PricingScheme& pr,
                                const GameParams& params) {
    ReportingOutcome out;
    const ReportingCase all[] = {ReportingCase::PoolLow, ReportingCase::PoolHigh,
                                 ReportingCase::Misreport, ReportingCase::Truthful};
    auto report_of = [](ReportingCase c, bool low_type) {
        switch (c) {
            case ReportingCase::PoolLow: return true;
            case ReportingCase::PoolHigh: return false;
            case ReportingCase::Misreport: return !low_type;
            case ReportingCase::Truthful: return low_type;
        }
        return low_type;
    };
    for (ReportingCase c : all) {
        BneResult r = solve_bne_case(c, m, pr, params);
        r.expected_cost_low = expected_cost_binary(m.alpha_low, report_of(c, true), r.sigma_low,
                                                   r.sigma_low, r.sigma_high, c, m, pr, params);
        r.expected_cost_high =
            expected_cost_binary(m.alpha_high, report_of(c, false), r.sigma_high, r.sigma_low,
                                 r.sigma_high, c, m, pr, params);
        out.cases[c] = r;
    }
    // the case that is simultaneously cheapest for both types, if any
    ReportingCase best_total = ReportingCase::Truthful;
    double best_total_cost = 1e300;
    for (const auto& [c, r] : out.cases) {
        const double tot = r.expected_cost_low + r.expected_cost_high;
        if (tot < best_total_cost) {
            best_total_cost = tot;
            best_total = c;
        }
    }
    ReportingCase chosen = best_total;
    bool stable = false;
    for (const auto& [c, r] : out.cases) {
        bool best_for_both = true;
        for (const auto& [c2, r2] : out.cases) {
            if (r2.expected_cost_low < r.expected_cost_low - 1e-12 ||
                r2.expected_cost_high < r.expected_cost_high - 1e-12)
                best_for_both = false;
        }
        if (best_for_both) {
            chosen = c;
            stable = true;
            break;
        }
    }
    out.chosen = chosen;
    out.stable = stable;
    const BneResult& ch = out.cases[chosen];
    double ml = 1e300, mh = 1e300;
    for (const auto& [c, r] : out.cases) {
        if (c == chosen) continue;
        ml = std::min(ml, r.expected_cost_low - ch.expected_cost_low);
        mh = std::min(mh, r.expected_cost_high - ch.expected_cost_high);
    }
    out.margin_low = ml;
    out.margin_high = mh;

    // diagnostic: single-client report deviation inside the chosen case
    auto unilateral = [&](bool low_type) {
        const bool truth_rep = report_of(chosen, low_type);
        const double alpha = low_type ? m.alpha_low : m.alpha_high;
        const double dev_sigma = best_deviation_sigma(alpha, !truth_rep, ch.sigma_low,
                                                      ch.sigma_high, chosen, m, pr, params);
        const double dev_cost = expected_cost_binary(alpha, !truth_rep, dev_sigma, ch.sigma_low,
                                                     ch.sigma_high, chosen, m, pr, params);
        return dev_cost - (low_type ? ch.expected_cost_low : ch.expected_cost_high);
    };
    out.unilateral_margin_low = unilateral(true);
    out.unilateral_margin_high = unilateral(false);
    return out;
}

}  // namespace fedprice
