#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedprice/config.hpp"
#include "fedprice/csv.hpp"
#include "fedprice/game.hpp"

namespace fedprice {

struct ExperimentConfig {
    std::string scenario;
    int n_clients = 20;
    double delta = 1e-5;
    double sensitivity = 1.0;
    double l_smooth = 1.0;
    double w0_dist = 1.0;
    int rounds = 30;
    double alpha_floor = 1e-4;
    std::vector<std::uint64_t> seeds;
    std::string out_path;

    // fig1
    double alpha_mean = 0.5;
    std::vector<double> variance_grid{0.0, 0.005, 0.01, 0.02, 0.04, 0.08, 0.12, 0.16};

    // fig2
    double alpha_low = 0.25;
    double alpha_high = 0.75;
    std::vector<double> eta_grid;
    bool empirical = true;
    int samples_per_client = 200;
    int svm_dim = 5;
    double svm_lambda = 0.1;
    double svm_margin = 2.0;

    // poa
    double floor_start = 0.05;
    double floor_end = 1e-6;
    int floor_points = 12;

    GameParams game_params() const;
    static ExperimentConfig from_config(const Config& cfg, const std::string& scenario);
};

// Each scenario returns the CSV it wrote (also written to cfg.out_path).
CsvWriter scenario_fig1(const ExperimentConfig& cfg);
CsvWriter scenario_fig2(const ExperimentConfig& cfg);
CsvWriter scenario_poa(const ExperimentConfig& cfg);

// Load config, apply overrides, run the named scenario, write CSV atomically.
// Returns the process exit status.
int run_scenario(const std::string& scenario, const std::string& config_path,
                 const std::vector<std::string>& overrides, std::uint64_t seed_override,
                 bool has_seed_override, const std::string& out_override);

}  // namespace fedprice
