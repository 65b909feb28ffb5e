// wavelab: structural checks, characteristic-profile integration, 2D wave
// simulation and decay reporting, driven by JSON configs.
//
//   wavelab <check|profile|simulate|report> --config <file> --out <dir> [--seed N]

#include <CLI11.hpp>

#include "wavelab/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"2D semilinear wave laboratory"};
    app.require_subcommand(1);

    std::string config_file, out_dir;
    std::int64_t seed = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "override the config seed");
    };
    add_common(app.add_subcommand("check", "structural condition reports"));
    add_common(app.add_subcommand("profile", "integrate profile rays"));
    add_common(app.add_subcommand("simulate", "run the grid solver"));
    add_common(app.add_subcommand("report", "decay report over a recorded run"));

    CLI11_PARSE(app, argc, argv);

    const std::string task = app.get_subcommands().front()->get_name();
    std::optional<std::uint64_t> seed_override;
    if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);
    return wavelab::run_command(task, config_file, out_dir, seed_override);
}
