#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "albird/dataset.hpp"
#include "albird/loop.hpp"

namespace albird {

/// JSON experiment config. Relative dataset paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
/// Full config with every default spelled out; parses back to an equal config.
std::string experiment_config_to_json(const ExperimentConfig& cfg);

SynthConfig parse_synth_config(std::string_view json_text);
SynthConfig load_synth_config(const std::filesystem::path& path);

inline constexpr std::string_view kCurvesHeader =
    "strategy,repetition,cycle,labeled_count,cmap,auroc,t1acc,evaluated_instances,skipped_classes";
inline constexpr std::string_view kImprovementHeader = "strategy,metric,cycle,labeled_count,abs_delta,rel_percent";

/// %.9g formatting used by every CSV float column.
std::string format_float(double v);

std::string curves_to_csv(const LearningCurve& curve);
LearningCurve parse_curves_csv(std::string_view text);
std::string improvement_to_csv(const std::vector<ImprovementRow>& rows);

/// One SVG document for `metric`: a polyline of relative improvement against
/// labeled count for each strategy present in `rows`.
std::string improvement_svg(const std::vector<ImprovementRow>& rows, Metric metric, std::string_view baseline);

std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace albird
