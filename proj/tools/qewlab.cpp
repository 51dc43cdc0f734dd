// qewlab: driven-interface laboratory over quenched random obstacle fields.
// Subcommands simulate the discrete and continuum front models, evaluate the
// closed-form velocity bounds, and run the path-ensemble verification checks.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qew/config.hpp"
#include "qew/runner.hpp"

namespace {

struct Overrides {
    std::string config_path;
    std::int64_t seed = -1;
    std::string out;
    int replicas = 0;
};

int run_mode(qew::Mode expected, const Overrides& ov) {
    qew::ParseResult parsed = qew::load_config(ov.config_path);
    if (!parsed.ok()) {
        for (const std::string& e : parsed.errors) std::cerr << "config error: " << e << "\n";
        return 2;
    }
    if (parsed.config.mode != expected) {
        std::cerr << "config mode '" << qew::mode_name(parsed.config.mode)
                  << "' does not match subcommand '" << qew::mode_name(expected) << "'\n";
        return 2;
    }
    if (ov.seed >= 0) parsed.config.seed = static_cast<std::uint64_t>(ov.seed);
    if (!ov.out.empty()) parsed.config.out = ov.out;
    if (ov.replicas > 0) parsed.config.replicas = ov.replicas;
    try {
        return qew::run_experiment(parsed.config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

void add_common(CLI::App* sub, Overrides& ov) {
    sub->add_option("--config", ov.config_path, "experiment config file")->required();
    sub->add_option("--seed", ov.seed, "override the master seed");
    sub->add_option("--out", ov.out, "override the output directory");
    sub->add_option("--replicas", ov.replicas, "override the replica count");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quenched Edwards-Wilkinson interface laboratory"};
    app.require_subcommand(1);
    Overrides ov;

    int rc = 0;
    auto hook = [&](qew::Mode mode) {
        return [&ov, &rc, mode]() { rc = run_mode(mode, ov); };
    };
    add_common(app.add_subcommand("simulate-discrete",
                                  "integrate the discrete front model")
                   ->callback(hook(qew::Mode::simulate_discrete)),
               ov);
    add_common(app.add_subcommand("simulate-continuum",
                                  "solve the continuum equation by finite differences")
                   ->callback(hook(qew::Mode::simulate_continuum)),
               ov);
    add_common(app.add_subcommand("bounds", "tabulate the closed-form velocity bounds")
                   ->callback(hook(qew::Mode::bounds)),
               ov);
    add_common(app.add_subcommand("verify", "path-ensemble and moment checks")
                   ->callback(hook(qew::Mode::verify)),
               ov);
    add_common(app.add_subcommand("sweep", "bound verification over an F grid")
                   ->callback(hook(qew::Mode::sweep)),
               ov);

    CLI11_PARSE(app, argc, argv);
    return rc;
}
