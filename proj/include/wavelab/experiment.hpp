// The four experiment drivers behind the CLI. Each returns the process exit
// code: 0 = completed (verdicts, including blow-up, are data), 2 =
// configuration error, 3 = missing inputs. run_experiment dispatches on the
// config task and maps exceptions to exit codes.

#pragma once

#include <filesystem>

#include "wavelab/io.hpp"

namespace wavelab {

int cmd_check(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_profile(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);
int cmd_report(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

int run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Loads the config, checks that its task matches `task`, runs it.
int run_command(const std::string& task, const std::filesystem::path& config_file,
                const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed_override);

json condition_report_to_json(const ConditionReport& rep);

} // namespace wavelab
