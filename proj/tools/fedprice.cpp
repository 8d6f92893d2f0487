#include <CLI11.hpp>
#include <string>
#include <vector>

#include "fedprice/scenarios.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fedprice: privacy-vs-accuracy pricing experiments for federated learning"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run a named scenario (fig1, fig2, poa)");
    std::string scenario, config_path, out_path;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    run->add_option("scenario", scenario, "scenario name: fig1 | fig2 | poa")->required();
    run->add_option("--config", config_path, "path to the config file")->required();
    auto* seed_opt = run->add_option("--seed", seed, "override the base seed");
    run->add_option("--out", out_path, "override the output CSV path");
    run->add_option("--override", overrides,
                    "config override section.key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return fedprice::run_scenario(scenario, config_path, overrides, seed,
                                      seed_opt->count() > 0, out_path);
    return 2;
}
