#include "fedprice/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fedprice/rng.hpp"
#include "fedprice/rootfind.hpp"

namespace fedprice {

double penalty_term(const ParameterVector& w_i, const std::vector<ParameterVector>& all_w,
                    double beta_i) {
    if (beta_i < 0.0) throw std::domain_error("penalty_term: beta must be >= 0");
    const ParameterVector mean = aggregate_mean(all_w);
    if (w_i.size() != mean.size()) throw std::invalid_argument("penalty_term: dimension mismatch");
    double q = 0.0;
    for (std::size_t k = 0; k < w_i.size(); ++k) {
        const double d = w_i[k] - mean[k];
        q += d * d;
    }
    return beta_i * q;
}

std::vector<double> betas_printed_complete(const TypeProfile& alphas,
                                           const NoiseProfile& sigma_so,
                                           const GameParams& params) {
    const std::size_t n = alphas.size();
    const double cs = params.cs();
    double denom = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        denom += (1.0 - alphas[k]) * std::pow(sigma_so[k], 3);
    denom *= 2.0 * (n - 1.0) * (n - 1.0);
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        double num = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) num += (1.0 - alphas[j]) * alphas[j] * cs;
        beta[i] = n * n * num / denom;
    }
    return beta;
}

std::vector<double> betas_aligned_complete(const TypeProfile& alphas,
                                           const NoiseProfile& sigma_so,
                                           const GameParams& params) {
    const std::size_t n = alphas.size();
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    double h = 0.0;
    for (double s : sigma_so.sigmas) h += 1.0 / (s * s);
    const double a = kappa * (1.0 + 1.0 / (std::sqrt(h) * lf)) * std::pow(h, -1.5);
    std::vector<double> beta(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = sigma_so[i];
        const double rhs = alphas[i] * cs / (s * s) - (1.0 - alphas[i]) * a / (s * s * s);
        beta[i] = std::max(0.0, rhs * n * n / (2.0 * (n - 1.0) * (n - 1.0) * s));
    }
    return beta;
}

namespace {

double expected_penalty(const NoiseProfile& sigma, std::size_t i, double beta_i) {
    const std::size_t n = sigma.size();
    const double pf = ((n - 1.0) / n) * ((n - 1.0) / n);
    double rest = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != i) rest += sigma[j] * sigma[j];
    return beta_i * (pf * sigma[i] * sigma[i] + rest / (n * n));
}

// Client i's cost with the expected penalty, as a function of its own sigma.
double priced_cost_at(const TypeProfile& alphas, const NoiseProfile& sigma_so, std::size_t i,
                      double beta_i, double s, const GameParams& params) {
    NoiseProfile tmp = sigma_so;
    tmp.sigmas[i] = s;
    return client_cost(alphas[i], tmp, i, params) +
           expected_penalty(tmp, i, beta_i);
}

bool validate_betas(const TypeProfile& alphas, const NoiseProfile& sigma_so,
                    const std::vector<double>& beta, const GameParams& params,
                    std::string* why) {
    const std::size_t n = alphas.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(beta[i] >= 0.0) || !std::isfinite(beta[i])) {
            if (why) *why = "beta not finite/nonnegative";
            return false;
        }
        const double s = sigma_so[i];
        const double base = priced_cost_at(alphas, sigma_so, i, beta[i], s, params);
        // stationarity by central differences, relative to the cost scale
        const double h = s * 1e-5;
        const double up = priced_cost_at(alphas, sigma_so, i, beta[i], s + h, params);
        const double dn = priced_cost_at(alphas, sigma_so, i, beta[i], s - h, params);
        const double grad = (up - dn) / (2.0 * h);
        if (std::abs(grad) * s / std::max(base, 1e-30) > 1e-5) {
            if (why) *why = "priced cost not stationary at sigma**";
            return false;
        }
        // +-20% unilateral deviations must strictly raise the priced cost
        const double lo = priced_cost_at(alphas, sigma_so, i, beta[i], 0.8 * s, params);
        const double hi = priced_cost_at(alphas, sigma_so, i, beta[i], 1.2 * s, params);
        if (!(lo > base && hi > base)) {
            if (why) *why = "a +-20% deviation does not raise the priced cost";
            return false;
        }
    }
    // stability probe: damped best-response dynamics must return to sigma**
    const CompleteSolution ne = solve_ne_complete(alphas, params);
    const double probes[] = {1.0, 1.6487212707001282, 0.5};  // e^0, e^0.5, about NE scale
    for (double f : probes) {
        std::vector<double> x0(n);
        for (std::size_t i = 0; i < n; ++i) x0[i] = ne.sigma[i] * f;
        const CompleteSolution br = best_response_priced(alphas, beta, params, x0);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(br.sigma[i] - sigma_so[i]) / sigma_so[i] > 1e-6) {
                if (why) *why = "best-response dynamics settle away from sigma**";
                return false;
            }
        }
    }
    return true;
}

}  // namespace

PricingScheme design_complete(const TypeProfile& alphas, const NoiseProfile& sigma_so,
                              const GameParams& params) {
    if (alphas.size() != sigma_so.size())
        throw std::invalid_argument("design_complete: size mismatch");
    const std::size_t n = alphas.size();
    if (n < 2) throw std::invalid_argument("design_complete: needs at least two clients");

    PricingScheme scheme;
    scheme.mode = PricingScheme::Mode::Complete;
    scheme.sigma_star = sigma_so.sigmas;
    scheme.betas_printed = betas_printed_complete(alphas, sigma_so, params);

    std::string why_printed, why_aligned;
    if (validate_betas(alphas, sigma_so, scheme.betas_printed, params, &why_printed)) {
        scheme.betas = scheme.betas_printed;
    } else {
        std::vector<double> aligned = betas_aligned_complete(alphas, sigma_so, params);
        if (!validate_betas(alphas, sigma_so, aligned, params, &why_aligned))
            throw construction_error("design_complete: printed betas failed (" + why_printed +
                                     "); re-derived betas failed (" + why_aligned + ")");
        scheme.betas = std::move(aligned);
    }

    // q balances the budget exactly: q = (1/N) sum_i E[penalty_i] at sigma**
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += expected_penalty(sigma_so, i, scheme.betas[i]);
    scheme.compensation = total / static_cast<double>(n);

    double qp = 0.0;
    for (std::size_t i = 0; i < n; ++i) qp += scheme.betas[i] * sigma_so[i];
    scheme.q_printed = 2.0 * (n - 1.0) * (n - 1.0) / n * qp;
    return scheme;
}

std::array<double, 2> design_incomplete_betas(const BinaryTypeModel& model,
                                              const std::array<double, 2>& sigma_so,
                                              const GameParams& params) {
    const int n = model.n_clients;
    const double eta = model.eta;
    if (!(eta > 0.0 && eta < 1.0))
        throw std::domain_error("design_incomplete_betas: eta in (0,1) required");
    const double sl = sigma_so[0], sh = sigma_so[1];
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const auto p = binomial_pmf(n, eta);  // the displayed sums use p(n) = C_N^n ...
    auto g = [&](double x) { return (1.0 + 1.0 / (std::sqrt(x) * lf)) * std::pow(x, -1.5); };

    double s1l = 0.0, s2l = 0.0, s1h = 0.0, s2h = 0.0;
    for (int nn = 0; nn < n; ++nn) {
        const double x1 = (nn + 1) / (sl * sl) + (n - 1 - nn) / (sh * sh);
        const double x2 = nn / (sl * sl) + (n - nn) / (sh * sh);
        s1l += p[nn] * nn * g(x1);
        s2l += p[nn] * nn * g(x2);
        s1h += p[nn] * (n - 1 - nn) * g(x1);
        s2h += p[nn] * (n - nn) * g(x2);
    }
    const double pref_l = kappa * n * n / (2.0 * (n - 1.0) * (n - 1.0) * std::pow(sl, 4));
    const double pref_h = kappa * n * n / (2.0 * (n - 1.0) * (n - 1.0) * std::pow(sh, 4));
    const double bl =
        pref_l * ((1.0 - model.alpha_low) * s1l +
                  (1.0 - eta) / eta * (1.0 - model.alpha_high) * s2l);
    const double bh =
        pref_h * (eta / (1.0 - eta) * (1.0 - model.alpha_low) * s1h +
                  (1.0 - model.alpha_high) * s2h);
    return {bl, bh};
}

std::array<double, 2> internalizing_betas(const BinaryTypeModel& model,
                                          const std::array<double, 2>& sigma_so,
                                          const GameParams& params) {
    const int n = model.n_clients;
    const double sl = sigma_so[0], sh = sigma_so[1];
    const double kappa = params.learning.kappa();
    const double lf = params.learning.l_smooth;
    const double cs = params.cs();
    const double pf = ((n - 1.0) / n) * ((n - 1.0) / n);
    const auto pn = binomial_pmf(n - 1, model.eta);
    auto g = [&](double x) { return (1.0 + 1.0 / (std::sqrt(x) * lf)) * std::pow(x, -1.5); };
    double suml = 0.0, sumh = 0.0;
    for (int nn = 0; nn < n; ++nn) {
        suml += pn[nn] * g((nn + 1) / (sl * sl) + (n - 1 - nn) / (sh * sh));
        sumh += pn[nn] * g(nn / (sl * sl) + (n - nn) / (sh * sh));
    }
    const double ml = (1.0 - model.alpha_low) * kappa * suml / (sl * sl * sl);
    const double mh = (1.0 - model.alpha_high) * kappa * sumh / (sh * sh * sh);
    return {std::max(0.0, (model.alpha_low * cs / (sl * sl) - ml) / (2.0 * pf * sl)),
            std::max(0.0, (model.alpha_high * cs / (sh * sh) - mh) / (2.0 * pf * sh))};
}

namespace {

struct CaseTable {
    // pre-reward expected cost and reward weighting per (case, type)
    struct Row {
        double cost_low, cost_high;       // pre-reward, pre-q
        bool low_rate_low, low_rate_high; // which reward rate each type earns
        double w_low, w_high;             // E[p(N-hat_L)] factor per type
    };
    std::map<ReportingCase, Row> rows;
};

CaseTable build_case_table(const BinaryTypeModel& m, const std::array<double, 2>& betas,
                           const GameParams& params) {
    PricingScheme pr;
    pr.mode = PricingScheme::Mode::Incomplete;
    pr.beta_low = betas[0];
    pr.beta_high = betas[1];

    const int n = m.n_clients;
    const auto pn = binomial_pmf(n - 1, m.eta);
    const auto pN = binomial_pmf(n, m.eta);
    double q2 = 0.0, d_truth = 0.0, q1 = 0.0, q1h = 0.0;
    for (int k = 0; k < n; ++k) {
        q2 += pn[k] * pN[k + 1];
        d_truth += pn[k] * pN[k];
        q1 += pn[k] * pN[n - 1 - k];
        q1h += pn[k] * pN[n - k];
    }

    CaseTable t;
    const ReportingCase all[] = {ReportingCase::PoolLow, ReportingCase::PoolHigh,
                                 ReportingCase::Misreport, ReportingCase::Truthful};
    for (ReportingCase c : all) {
        const BneResult r = solve_bne_case(c, m, pr, params);
        auto report_of = [&](bool low_type) {
            switch (c) {
                case ReportingCase::PoolLow: return true;
                case ReportingCase::PoolHigh: return false;
                case ReportingCase::Misreport: return !low_type;
                case ReportingCase::Truthful: return low_type;
            }
            return low_type;
        };
        CaseTable::Row row{};
        row.cost_low = expected_cost_binary(m.alpha_low, report_of(true), r.sigma_low,
                                            r.sigma_low, r.sigma_high, c, m, pr, params);
        row.cost_high = expected_cost_binary(m.alpha_high, report_of(false), r.sigma_high,
                                             r.sigma_low, r.sigma_high, c, m, pr, params);
        row.low_rate_low = report_of(true);
        row.low_rate_high = report_of(false);
        switch (c) {
            case ReportingCase::Truthful:
                row.w_low = q2;
                row.w_high = d_truth;
                break;
            case ReportingCase::Misreport:
                row.w_low = q1;
                row.w_high = q1h;
                break;
            case ReportingCase::PoolLow:
                row.w_low = pN[n];
                row.w_high = pN[n];
                break;
            case ReportingCase::PoolHigh:
                row.w_low = pN[0];
                row.w_high = pN[0];
                break;
        }
        t.rows[c] = row;
    }
    return t;
}

}  // namespace

RewardDesign design_incomplete_rewards(const BinaryTypeModel& model,
                                       const std::array<double, 2>& betas,
                                       const GameParams& params) {
    const CaseTable table = build_case_table(model, betas, params);
    const auto& truth = table.rows.at(ReportingCase::Truthful);
    const auto& mis = table.rows.at(ReportingCase::Misreport);

    // margin of truthful vs case c for one type, as a function of (rL, rH):
    //   margin = [cost_c - w_c * r_c] - [cost_truth - w_truth * r_truth]
    struct Constraint {
        double a, b, d;  // a*rL + b*rH >= d
    };
    std::vector<Constraint> cons;
    for (const auto& [c, row] : table.rows) {
        if (c == ReportingCase::Truthful) continue;
        {  // low type
            double a = 0.0, b = 0.0;
            (truth.low_rate_low ? a : b) += truth.w_low;
            (row.low_rate_low ? a : b) -= row.w_low;
            cons.push_back({a, b, truth.cost_low - row.cost_low});
        }
        {  // high type
            double a = 0.0, b = 0.0;
            (truth.low_rate_high ? a : b) += truth.w_high;
            (row.low_rate_high ? a : b) -= row.w_high;
            cons.push_back({a, b, truth.cost_high - row.cost_high});
        }
    }
    auto margins = [&](double rl, double rh) {
        std::array<double, 2> m{1e300, 1e300};  // low, high
        int idx = 0;
        for (const auto& cst : cons) {
            const double v = cst.a * rl + cst.b * rh - cst.d;
            m[idx % 2] = std::min(m[idx % 2], v);
            ++idx;
        }
        return m;
    };

    const int n = model.n_clients;
    const auto pn = binomial_pmf(n - 1, model.eta);
    const auto pN = binomial_pmf(n, model.eta);
    double q1 = 0.0, q2 = 0.0;
    for (int k = 0; k < n; ++k) {
        q1 += pn[k] * pN[n - 1 - k];
        q2 += pn[k] * pN[k + 1];
    }

    RewardDesign out;
    out.q1 = q1;
    out.q2 = q2;

    // route (a): the paper's quotient with A1..A4 read as the numerically
    // computed truthful/misreport pre-reward costs
    const double den = q2 * q2 - q1 * q1;
    if (std::abs(den) > 1e-300) {
        const double a3_a1 = truth.cost_high - truth.cost_low;
        const double a2_a4 = mis.cost_low - mis.cost_high;
        const double rl = std::max((q2 * a3_a1 - q1 * a2_a4) / den, 0.0);
        const double rh = std::max((q1 * a3_a1 - q2 * a2_a4) / den, 0.0);
        const auto m = margins(rl, rh);
        if (m[0] >= -1e-9 && m[1] >= -1e-9) {
            out.reward_low = rl;
            out.reward_high = rh;
            out.used_printed_formula = true;
            out.margin_low = m[0];
            out.margin_high = m[1];
            return out;
        }
    }

    // route (b): minimal nonnegative rewards meeting every case-comparison
    // constraint; the optimum sits on the two binding IC constraints.
    double best_rl = -1.0, best_rh = -1.0, best_sum = 1e300;
    auto consider = [&](double rl, double rh) {
        if (!(rl >= -1e-12 && rh >= -1e-12)) return;
        rl = std::max(rl, 0.0);
        rh = std::max(rh, 0.0);
        const auto m = margins(rl, rh);
        if (m[0] >= -1e-9 && m[1] >= -1e-9 && rl + rh < best_sum) {
            best_sum = rl + rh;
            best_rl = rl;
            best_rh = rh;
        }
    };
    consider(0.0, 0.0);
    for (std::size_t i = 0; i < cons.size(); ++i) {
        if (cons[i].a != 0.0) consider(cons[i].d / cons[i].a, 0.0);
        if (cons[i].b != 0.0) consider(0.0, cons[i].d / cons[i].b);
        for (std::size_t j = i + 1; j < cons.size(); ++j) {
            const double det = cons[i].a * cons[j].b - cons[j].a * cons[i].b;
            if (std::abs(det) < 1e-300) continue;
            const double rl = (cons[i].d * cons[j].b - cons[j].d * cons[i].b) / det;
            const double rh = (cons[i].a * cons[j].d - cons[j].a * cons[i].d) / det;
            consider(rl, rh);
        }
    }
    if (best_rl < 0.0)
        throw construction_error(
            "design_incomplete_rewards: no nonnegative rewards satisfy the IC constraints");
    out.reward_low = best_rl;
    out.reward_high = best_rh;
    const auto m = margins(best_rl, best_rh);
    out.margin_low = m[0];
    out.margin_high = m[1];
    return out;
}

double reward_for_report(double report, const std::vector<double>& all_reports,
                         const std::array<double, 2>& rewards, const BinaryTypeModel& model) {
    auto classify = [&](double r) {
        if (r == model.alpha_low) return true;
        if (r == model.alpha_high) return false;
        throw std::domain_error("reward_for_report: report outside the binary support");
    };
    const bool is_low = classify(report);
    int nhat = 0;
    for (double r : all_reports) nhat += classify(r) ? 1 : 0;
    const auto p = binomial_pmf(model.n_clients, model.eta);
    return (is_low ? rewards[0] : rewards[1]) * p[nhat];
}

double compensation_incomplete(const BinaryTypeModel& model, const PricingScheme& scheme,
                               const BneResult& bne, std::uint64_t mc_draws,
                               std::uint64_t seed) {
    const int n = model.n_clients;
    const double nn = static_cast<double>(n);
    const double pf = ((nn - 1.0) / nn) * ((nn - 1.0) / nn);
    const double sl = bne.sigma_low, sh = bne.sigma_high;
    auto epen_low = [&](int k) {
        return scheme.beta_low *
               (pf * sl * sl + ((k - 1) * sl * sl + (n - k) * sh * sh) / (nn * nn));
    };
    auto epen_high = [&](int k) {
        return scheme.beta_high *
               (pf * sh * sh + (k * sl * sl + (n - k - 1) * sh * sh) / (nn * nn));
    };
    const auto pN = binomial_pmf(n, model.eta);
    if (n <= 30) {
        double net = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double pens = k * epen_low(k) + (n - k) * epen_high(k);
            const double rews = pN[k] * (k * scheme.reward_low + (n - k) * scheme.reward_high);
            net += pN[k] * (pens - rews);
        }
        return net / nn;
    }
    Rng rng(seed, /*stream=*/0xC0FFEE);
    double net = 0.0;
    for (std::uint64_t d = 0; d < mc_draws; ++d) {
        int k = 0;
        for (int i = 0; i < n; ++i) k += (rng.next_uniform() < model.eta) ? 1 : 0;
        const double pens = k * epen_low(k) + (n - k) * epen_high(k);
        const double rews = pN[k] * (k * scheme.reward_low + (n - k) * scheme.reward_high);
        net += pens - rews;
    }
    return net / (nn * static_cast<double>(mc_draws));
}

PricingScheme design_incomplete(const BinaryTypeModel& model, const GameParams& params,
                                std::uint64_t seed) {
    const BinarySoResult so = solve_so_binary(model, params);
    PricingScheme scheme;
    scheme.mode = PricingScheme::Mode::Incomplete;
    scheme.seed = seed;
    scheme.sigma_star = {so.sigma_low, so.sigma_high};
    const auto betas = design_incomplete_betas(model, {so.sigma_low, so.sigma_high}, params);
    scheme.beta_low = betas[0];
    scheme.beta_high = betas[1];
    const RewardDesign rd = design_incomplete_rewards(model, betas, params);
    scheme.reward_low = rd.reward_low;
    scheme.reward_high = rd.reward_high;
    const BneResult bne = solve_bne_case(ReportingCase::Truthful, model, scheme, params);
    scheme.compensation = compensation_incomplete(model, scheme, bne, 200000, seed);
    return scheme;
}

void apply_prices(RoundOutcome& outcome, const PricingScheme& scheme,
                  const BinaryTypeModel* model) {
    const std::size_t n = outcome.noisy_params.size();
    if (n == 0) throw std::invalid_argument("apply_prices: no clients");
    const double dim = static_cast<double>(outcome.noisy_params.front().size());
    outcome.prices.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double beta = 0.0;
        double reward = 0.0;
        if (scheme.mode == PricingScheme::Mode::Complete) {
            beta = scheme.betas.empty() ? 0.0 : scheme.betas[i];
        } else {
            if (!model)
                throw std::invalid_argument("apply_prices: incomplete mode needs the type model");
            if (outcome.reports.size() != n)
                throw std::invalid_argument("apply_prices: reports missing");
            const bool low = outcome.reports[i] == model->alpha_low;
            beta = low ? scheme.beta_low : scheme.beta_high;
            reward = reward_for_report(outcome.reports[i], outcome.reports,
                                       {scheme.reward_low, scheme.reward_high}, *model);
        }
        outcome.prices[i] = penalty_term(outcome.noisy_params[i], outcome.noisy_params,
                                         beta / dim) -
                            reward - scheme.compensation;
    }
}

std::string PricingScheme::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "fedprice-pricing v1\n";
    os << "mode = " << (mode == Mode::Complete ? "complete" : "incomplete") << "\n";
    os << "seed = " << seed << "\n";
    os << "q = " << compensation << "\n";
    os << "q_printed = " << q_printed << "\n";
    if (mode == Mode::Complete) {
        os << "betas =";
        for (double b : betas) os << ' ' << b;
        os << "\n";
        os << "betas_printed =";
        for (double b : betas_printed) os << ' ' << b;
        os << "\n";
    } else {
        os << "beta_low = " << beta_low << "\n";
        os << "beta_high = " << beta_high << "\n";
        os << "reward_low = " << reward_low << "\n";
        os << "reward_high = " << reward_high << "\n";
    }
    os << "sigma_star =";
    for (double s : sigma_star) os << ' ' << s;
    os << "\n";
    return os.str();
}

PricingScheme PricingScheme::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != "fedprice-pricing v1")
        throw std::runtime_error("PricingScheme::parse: bad header");
    PricingScheme out;
    while (std::getline(is, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(0, eq);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        std::istringstream val(line.substr(eq + 1));
        if (key == "mode") {
            std::string v;
            val >> v;
            out.mode = (v == "complete") ? Mode::Complete : Mode::Incomplete;
        } else if (key == "seed") {
            val >> out.seed;
        } else if (key == "q") {
            val >> out.compensation;
        } else if (key == "q_printed") {
            val >> out.q_printed;
        } else if (key == "beta_low") {
            val >> out.beta_low;
        } else if (key == "beta_high") {
            val >> out.beta_high;
        } else if (key == "reward_low") {
            val >> out.reward_low;
        } else if (key == "reward_high") {
            val >> out.reward_high;
        } else if (key == "betas") {
            double v;
            while (val >> v) out.betas.push_back(v);
        } else if (key == "betas_printed") {
            double v;
            while (val >> v) out.betas_printed.push_back(v);
        } else if (key == "sigma_star") {
            double v;
            while (val >> v) out.sigma_star.push_back(v);
        }
    }
    return out;
}

}  // namespace fedprice
