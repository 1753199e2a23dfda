#include "kgscat/cli.hpp"
#include "kgscat/kgwave.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Two-particle Klein-Gordon scattering diagnostics"};
    app.set_version_flag("--version", kgscat::code_version());
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    int jobs = 1;
    std::vector<std::string> overrides;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", scenario_path, "scenario YAML file or run manifest")->required();
        sub->add_option("--out", out_dir, "output directory (default: output.dir)");
        sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--override", overrides, "KEY=VALUE with a dotted key, e.g. evolution.T=200");
    };
    auto* sim = app.add_subcommand("simulate", "evolve and write the trajectory log");
    auto* graf = app.add_subcommand("graf-check", "build the convex function and check its Hessian");
    auto* lim = app.add_subcommand("limits", "intermediate limit, oracles and completeness");
    auto* est = app.add_subcommand("estimates", "propagation estimates and monitors");
    for (auto* s : {sim, graf, lim, est}) add_common(s);

    CLI11_PARSE(app, argc, argv);

    try {
        const auto scenario = kgscat::load_scenario(scenario_path, overrides);
        for (const auto& w : scenario.warnings) std::cerr << "warning: " << w << '\n';
        kgscat::RunContext ctx{out_dir, jobs, &std::cerr};
        if (sim->parsed()) return kgscat::cmd_simulate(scenario, ctx);
        if (graf->parsed()) return kgscat::cmd_graf_check(scenario, ctx);
        if (lim->parsed()) return kgscat::cmd_limits(scenario, ctx);
        return kgscat::cmd_estimates(scenario, ctx);
    } catch (const kgscat::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kgscat::exit_validation;
    } catch (const kgscat::GuardError& e) {
        std::cerr << "guard: " << e.what() << '\n';
        return kgscat::exit_guard;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kgscat::exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 1;
    }
}
