#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "albird/report.hpp"

namespace albird {

struct RunReport {
  ExperimentConfig config;
  std::filesystem::path curves_csv;
  std::filesystem::path improvement_csv;
  std::vector<double> run_seconds;
};

/// Validates the dataset and prints a summary. Returns the process exit code.
int cmd_validate(const std::filesystem::path& dir, std::ostream& out, std::ostream& err);

RunReport cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
                  std::size_t jobs = 1);

void cmd_synth(const std::filesystem::path& config_path, std::uint64_t seed, const std::filesystem::path& out_dir);

/// Writes improvement.csv (to `out_csv`, default next to the curves) and,
/// when `svg_dir` is set, one improvement_<metric>.svg per metric.
std::filesystem::path cmd_report(const std::filesystem::path& curves_csv, std::string_view baseline,
                                 const std::optional<std::filesystem::path>& svg_dir,
                                 const std::optional<std::filesystem::path>& out_csv = std::nullopt);

/// Full `albird` command line; returns the exit code (0 ok, 1 validation or
/// config error, 2 runtime error).
int run_cli(int argc, char** argv);

}  // namespace albird
