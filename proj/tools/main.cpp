#include "infotrade/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace infotrade::commands;

    CLI::App app{"Two-trader information-exchange model: simulation, validation and asymptotics"};
    app.require_subcommand(1);

    Options opts;
    std::string engines;
    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config, "JSON scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
        sub->add_option("--engines", engines, "comma list of exact, ode, perturb (overrides config)");
        sub->add_flag("--quiet", opts.quiet, "suppress stdout");
    };
    auto* run = app.add_subcommand("run", "time series CSV per engine");
    auto* compare = app.add_subcommand("compare", "run the configured validation suites");
    auto* asymptote = app.add_subcommand("asymptote", "asymptotic portfolio shifts over a parameter sweep");
    for (auto* sub : {run, compare, asymptote}) common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : Config;
    }
    if (!engines.empty()) opts.engines = engines;

    if (*run) return cmd_run(opts, std::cout, std::cerr);
    if (*compare) return cmd_compare(opts, std::cout, std::cerr);
    return cmd_asymptote(opts, std::cout, std::cerr);
}
