#include "fedprice/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedprice/binary_game.hpp"
#include "fedprice/flsim.hpp"
#include "fedprice/mechanism.hpp"
#include "fedprice/rng.hpp"
#include "fedprice/rootfind.hpp"

namespace fedprice {

GameParams ExperimentConfig::game_params() const {
    GameParams p(PrivacyParams::minimal(sensitivity, delta),
                 LearningConfig::make(l_smooth, w0_dist, rounds));
    p.alpha_floor = alpha_floor;
    return p;
}

ExperimentConfig ExperimentConfig::from_config(const Config& cfg, const std::string& scenario) {
    ExperimentConfig e;
    e.scenario = scenario;
    e.n_clients = static_cast<int>(cfg.get_int("common.n_clients", 20));
    e.delta = cfg.get_double("common.delta", 1e-5);
    e.sensitivity = cfg.get_double("common.sensitivity", 1.0);
    e.l_smooth = cfg.get_double("common.l_smooth", 1.0);
    e.w0_dist = cfg.get_double("common.w0_dist", 1.0);
    e.rounds = static_cast<int>(cfg.get_int("common.rounds", 30));
    e.alpha_floor = cfg.get_double("common.alpha_floor", 1e-4);
    e.out_path = cfg.get_str("common.out", scenario + ".csv");

    const long nseeds = cfg.get_int("common.seeds", 20);
    const std::uint64_t seed0 = static_cast<std::uint64_t>(cfg.get_int("common.seed", 1));
    for (long s = 0; s < nseeds; ++s) e.seeds.push_back(seed0 + static_cast<std::uint64_t>(s));

    e.alpha_mean = cfg.get_double("fig1.alpha_mean", 0.5);
    e.variance_grid = cfg.get_list("fig1.variance_grid", e.variance_grid);

    e.alpha_low = cfg.get_double("fig2.alpha_low", 0.25);
    e.alpha_high = cfg.get_double("fig2.alpha_high", 0.75);
    std::vector<double> eta_default;
    for (int k = 1; k <= 18; ++k) eta_default.push_back(0.05 * k);
    e.eta_grid = cfg.get_list("fig2.eta_grid", eta_default);
    e.empirical = cfg.get_bool("fig2.empirical", true);
    e.samples_per_client = static_cast<int>(cfg.get_int("fig2.samples_per_client", 200));
    e.svm_dim = static_cast<int>(cfg.get_int("fig2.svm_dim", 5));
    e.svm_lambda = cfg.get_double("fig2.svm_lambda", 0.1);
    e.svm_margin = cfg.get_double("fig2.svm_margin", 2.0);

    e.floor_start = cfg.get_double("poa.floor_start", 0.05);
    e.floor_end = cfg.get_double("poa.floor_end", 1e-6);
    e.floor_points = static_cast<int>(cfg.get_int("poa.floor_points", 12));
    if (cfg.has("poa.n_clients"))
        e.n_clients = static_cast<int>(cfg.get_int("poa.n_clients", e.n_clients));
    return e;
}

namespace {

std::string config_comment(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os << "config: n_clients=" << cfg.n_clients << " delta=" << fmt_double(cfg.delta)
       << " sensitivity=" << fmt_double(cfg.sensitivity)
       << " l_smooth=" << fmt_double(cfg.l_smooth) << " w0_dist=" << fmt_double(cfg.w0_dist)
       << " rounds=" << cfg.rounds << " alpha_floor=" << fmt_double(cfg.alpha_floor)
       << " seeds=" << cfg.seeds.size();
    return os.str();
}

}  // namespace

CsvWriter scenario_fig1(const ExperimentConfig& cfg) {
    const GameParams params = cfg.game_params();
    CsvWriter csv("# fedprice-csv v1 fig1");
    csv.comment(config_comment(cfg));
    csv.comment("alpha ~ Normal(mean, sqrt(variance)) clamped to [floor, 1-floor]; "
                "seed=-1 rows are seed averages");
    csv.header("variance,seed,sc_no_pricing,sc_with_pricing,sc_opt,gamma_no_pricing,status");

    for (double var : cfg.variance_grid) {
        double avg_no = 0.0, avg_with = 0.0, avg_opt = 0.0;
        int ok_cells = 0;
        std::vector<std::string> rows;
        for (std::uint64_t seed : cfg.seeds) {
            Rng rng(seed, /*stream=*/11);
            std::vector<double> raw(cfg.n_clients);
            const double sd = std::sqrt(var);
            for (int i = 0; i < cfg.n_clients; ++i)
                raw[i] = cfg.alpha_mean + sd * rng.next_gaussian();
            const TypeProfile alphas = params.clamp(raw);
            std::string status = "ok";
            double sc_no = 0.0, sc_with = 0.0, sc_opt = 0.0;
            try {
                const CompleteSolution ne = solve_ne_complete(alphas, params);
                const CompleteSolution so = solve_so_complete(alphas, params);
                sc_no = social_cost(alphas, ne.sigma, params);
                sc_opt = social_cost(alphas, so.sigma, params);
                const PricingScheme scheme = design_complete(alphas, so.sigma, params);
                const CompleteSolution priced =
                    best_response_priced(alphas, scheme.betas, params, ne.sigma.sigmas);
                sc_with = social_cost(alphas, priced.sigma, params);
                avg_no += sc_no;
                avg_with += sc_with;
                avg_opt += sc_opt;
                ++ok_cells;
            } catch (const std::exception& e) {
                status = std::string("failed:") + e.what();
            }
            std::ostringstream row;
            row << fmt_double(var) << ',' << seed << ',' << fmt_double(sc_no) << ','
                << fmt_double(sc_with) << ',' << fmt_double(sc_opt) << ','
                << fmt_double(sc_opt > 0 ? sc_no / sc_opt : 0.0) << ',' << status;
            rows.push_back(row.str());
        }
        for (const auto& r : rows) csv.row(r);
        if (ok_cells > 0) {
            std::ostringstream row;
            row << fmt_double(var) << ",-1," << fmt_double(avg_no / ok_cells) << ','
                << fmt_double(avg_with / ok_cells) << ',' << fmt_double(avg_opt / ok_cells)
                << ',' << fmt_double(avg_no / std::max(avg_opt, 1e-300)) << ",avg_of_"
                << ok_cells;
            csv.row(row.str());
        }
        std::cout << "fig1 variance=" << var << " cells=" << ok_cells << "/"
                  << cfg.seeds.size() << "\n";
    }
    return csv;
}

CsvWriter scenario_fig2(const ExperimentConfig& cfg) {
    const GameParams params = cfg.game_params();
    CsvWriter csv("# fedprice-csv v1 fig2");
    csv.comment(config_comment(cfg));
    csv.comment("alpha_low=" + fmt_double(cfg.alpha_low) +
                " alpha_high=" + fmt_double(cfg.alpha_high) + " theoretical expected "
                "social costs; empirical loss-gap companions over the seed list");
    csv.header(
        "eta,sc_no_pricing,sc_with_pricing,sc_opt,chosen_case,ic_margin_low,ic_margin_high,"
        "no_pricing_boundary,emp_gap_no_pricing,emp_gap_with_pricing,status");

    SvmConfig svm;
    svm.lambda_reg = cfg.svm_lambda;
    svm.dim = cfg.svm_dim;
    svm.samples_per_client = cfg.samples_per_client;
    svm.margin = cfg.svm_margin;

    std::array<double, 2> warm{0.0, 0.0};
    bool have_warm = false;
    for (double eta : cfg.eta_grid) {
        std::string status = "ok";
        std::ostringstream row;
        try {
            const BinaryTypeModel model(cfg.alpha_low, cfg.alpha_high, eta, cfg.n_clients);
            const PricingScheme scheme = design_incomplete(model, params, cfg.seeds.front());
            // no-pricing benchmark: truthful-case BNE with zero pricing, warm-started
            const PricingScheme none = PricingScheme::none();
            const BneResult np = solve_bne_case(ReportingCase::Truthful, model, none, params,
                                                have_warm ? &warm : nullptr);
            if (!np.boundary) {
                warm = {np.sigma_low, np.sigma_high};
                have_warm = true;
            }
            const BneResult pr = solve_bne_case(ReportingCase::Truthful, model, scheme, params);
            const double sc_no = expected_sc_binary(np.sigma_low, np.sigma_high, model, params);
            const double sc_with =
                expected_sc_binary(pr.sigma_low, pr.sigma_high, model, params);
            const double sc_opt = expected_sc_binary(scheme.sigma_star[0],
                                                     scheme.sigma_star[1], model, params);
            const ReportingOutcome rep = best_reporting(model, scheme, params);

            double emp_no = 0.0, emp_with = 0.0;
            if (cfg.empirical) {
                const LearningConfig lcfg0 = params.learning;
                for (std::uint64_t seed : cfg.seeds) {
                    const auto datasets = generate_synthetic(svm, cfg.n_clients, seed);
                    SvmConfig svm_run = svm;
                    LearningConfig lcfg = LearningConfig::make(
                        estimate_smoothness(datasets, svm_run), lcfg0.w0_dist, lcfg0.rounds);
                    const ParameterVector wstar = reference_optimum(datasets, svm_run, 1e-8);
                    Rng trng(seed, /*stream=*/21);
                    std::vector<double> sig_no(cfg.n_clients), sig_with(cfg.n_clients);
                    for (int i = 0; i < cfg.n_clients; ++i) {
                        const bool low = trng.next_uniform() < eta;
                        sig_no[i] = low ? np.sigma_low : np.sigma_high;
                        sig_with[i] = low ? pr.sigma_low : pr.sigma_high;
                    }
                    FederationOptions opts;
                    opts.rule = AggregationRule::Mle;
                    const FederationTrace t_no = run_federation(
                        datasets, NoiseProfile(sig_no), opts, svm_run, lcfg, seed);
                    const FederationTrace t_with = run_federation(
                        datasets, NoiseProfile(sig_with), opts, svm_run, lcfg, seed);
                    emp_no += empirical_loss_gap(t_no, wstar, datasets, svm_run);
                    emp_with += empirical_loss_gap(t_with, wstar, datasets, svm_run);
                }
                emp_no /= static_cast<double>(cfg.seeds.size());
                emp_with /= static_cast<double>(cfg.seeds.size());
            }

            row << fmt_double(eta) << ',' << fmt_double(sc_no) << ',' << fmt_double(sc_with)
                << ',' << fmt_double(sc_opt) << ',' << to_string(rep.chosen) << ','
                << fmt_double(rep.margin_low) << ',' << fmt_double(rep.margin_high) << ','
                << (np.boundary ? 1 : 0) << ',' << fmt_double(emp_no) << ','
                << fmt_double(emp_with) << ',' << status;
        } catch (const std::exception& e) {
            status = std::string("failed:") + e.what();
            row.str("");
            row << fmt_double(eta) << ",0,0,0,none,0,0,0,0,0," << status;
        }
        csv.row(row.str());
        std::cout << "fig2 eta=" << eta << " " << status << "\n";
    }
    return csv;
}

CsvWriter scenario_poa(const ExperimentConfig& cfg) {
    const GameParams params = cfg.game_params();
    CsvWriter csv("# fedprice-csv v1 poa");
    csv.comment(config_comment(cfg));
    csv.comment("one client at 1-floor, the rest at floor; floor shrinks geometrically");
    csv.header("index,floor,gamma,sc_ne,sc_opt,status");
    const double ratio =
        std::pow(cfg.floor_end / cfg.floor_start, 1.0 / std::max(1, cfg.floor_points - 1));
    double floor = cfg.floor_start;
    for (int k = 0; k < cfg.floor_points; ++k, floor *= ratio) {
        std::ostringstream row;
        try {
            std::vector<double> al(cfg.n_clients, floor);
            al[0] = 1.0 - floor;
            GameParams p = params;
            p.alpha_floor = std::min(params.alpha_floor, floor);
            const EquilibriumResult r = price_of_anarchy(TypeProfile(al), p);
            row << k << ',' << fmt_double(floor) << ',' << fmt_double(r.gamma) << ','
                << fmt_double(r.sc_ne) << ',' << fmt_double(r.sc_opt) << ",ok";
            std::cout << "poa floor=" << floor << " gamma=" << r.gamma << "\n";
        } catch (const std::exception& e) {
            row << k << ',' << fmt_double(floor) << ",0,0,0,failed:" << e.what();
            csv.row(row.str());
            break;  // stop at the last solved point
        }
        csv.row(row.str());
    }
    return csv;
}

int run_scenario(const std::string& scenario, const std::string& config_path,
                 const std::vector<std::string>& overrides, std::uint64_t seed_override,
                 bool has_seed_override, const std::string& out_override) {
    std::ifstream f(config_path);
    if (!f) {
        std::cerr << "error: cannot read config file: " << config_path << "\n";
        return 2;
    }
    std::stringstream buf;
    buf << f.rdbuf();
    Config cfg;
    try {
        cfg = Config::parse(buf.str());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos) {
            std::cerr << "error: override must be section.key=value: " << ov << "\n";
            return 2;
        }
        cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (has_seed_override) cfg.set("common.seed", std::to_string(seed_override));

    ExperimentConfig e;
    try {
        e = ExperimentConfig::from_config(cfg, scenario);
    } catch (const std::exception& ex) {
        std::cerr << "error: bad config: " << ex.what() << "\n";
        return 2;
    }
    if (!out_override.empty()) e.out_path = out_override;

    try {
        CsvWriter csv = [&] {
            if (scenario == "fig1") return scenario_fig1(e);
            if (scenario == "fig2") return scenario_fig2(e);
            if (scenario == "poa") return scenario_poa(e);
            throw std::runtime_error("unknown scenario: " + scenario);
        }();
        csv.write_atomic(e.out_path);
        std::cout << "wrote " << e.out_path << "\n";
        return 0;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace fedprice
