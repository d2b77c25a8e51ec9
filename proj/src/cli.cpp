#include "albird/cli.hpp"

#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <json.hpp>

#include "albird/error.hpp"

namespace albird {

namespace fs = std::filesystem;

int cmd_validate(const fs::path& dir, std::ostream& out, std::ostream& err) {
  try {
    const auto ds = load_dataset(dir);
    std::map<int, std::size_t> per_day;
    std::size_t no_bird = 0;
    for (std::size_t i = 0; i < ds.num_instances(); ++i) {
      ++per_day[ds.meta[i].day];
      const auto row = ds.labels.row(i);
      if (std::none_of(row.begin(), row.end(), [](auto v) { return v != 0; })) ++no_bird;
    }
    out << "N=" << ds.num_instances() << " D=" << ds.dim() << " C=" << ds.num_classes() << '\n';
    for (const auto& [day, count] : per_day) out << "day " << day << ": " << count << '\n';
    out << "no-bird rows: " << no_bird << '\n';
    out << "OK\n";
    return 0;
  } catch (const Error& e) {
    err << "invalid dataset: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  }
}

RunReport cmd_run(const fs::path& config_path, const fs::path& out_dir, std::size_t jobs) {
  RunReport report;
  report.config = load_experiment_config(config_path);
  const auto ds = load_dataset(report.config.dataset);
  const auto curve = run_experiment(ds, report.config, jobs, &report.run_seconds);

  fs::create_directories(out_dir);
  report.curves_csv = out_dir / "curves.csv";
  report.improvement_csv = out_dir / "improvement.csv";
  const auto curves_text = curves_to_csv(curve);
  write_file_atomic(report.curves_csv, curves_text);
  // Summarize the values as written so `report` on curves.csv reproduces this file.
  std::vector<ImprovementRow> improvement;
  const auto& strategies = report.config.strategies;
  if (std::find(strategies.begin(), strategies.end(), Strategy::Random) != strategies.end()) {
    improvement = improvement_curves(parse_curves_csv(curves_text), Strategy::Random);
  }
  write_file_atomic(report.improvement_csv, improvement_to_csv(improvement));
  write_file_atomic(out_dir / "config_echo.json", experiment_config_to_json(report.config));

  nlohmann::ordered_json timing;
  timing["curves_csv"] = report.curves_csv.generic_string();
  timing["improvement_csv"] = report.improvement_csv.generic_string();
  timing["runs"] = nlohmann::json::array();
  for (std::size_t task = 0; task < report.run_seconds.size(); ++task) {
    timing["runs"].push_back({{"strategy", strategy_name(strategies[task / report.config.repetitions])},
                              {"repetition", task % report.config.repetitions},
                              {"seconds", report.run_seconds[task]}});
  }
  write_file_atomic(out_dir / "run_report.json", timing.dump(2) + "\n");
  return report;
}

void cmd_synth(const fs::path& config_path, std::uint64_t seed, const fs::path& out_dir) {
  const auto ds = synth_dataset(load_synth_config(config_path), seed);
  write_dataset(ds, out_dir);
  if (!(load_dataset(out_dir) == ds)) throw Error(Errc::Io, "synthetic dataset did not round-trip through " + out_dir.string());
}

fs::path cmd_report(const fs::path& curves_csv, std::string_view baseline, const std::optional<fs::path>& svg_dir,
                    const std::optional<fs::path>& out_csv) {
  const auto base = parse_strategy(baseline);
  const auto rows = improvement_curves(parse_curves_csv(read_text_file(curves_csv)), base);
  const auto target = out_csv ? *out_csv : curves_csv.parent_path() / "improvement.csv";
  write_file_atomic(target, improvement_to_csv(rows));
  if (svg_dir) {
    fs::create_directories(*svg_dir);
    for (auto m : kAllMetrics) {
      write_file_atomic(*svg_dir / ("improvement_" + std::string(metric_name(m)) + ".svg"),
                        improvement_svg(rows, m, strategy_name(base)));
    }
  }
  return target;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Pool-based active learning benchmark over precomputed embeddings"};
  app.require_subcommand(1);

  std::string validate_dir;
  auto* validate = app.add_subcommand("validate", "Check a dataset directory and print a summary");
  validate->add_option("dir", validate_dir, "Dataset directory")->required();

  std::string synth_config, synth_out;
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gaussian-cluster dataset");
  synth->add_option("--config", synth_config, "Synthetic dataset JSON config")->required();
  synth->add_option("--seed", synth_seed, "Generator seed")->required();
  synth->add_option("--out", synth_out, "Output dataset directory")->required();

  std::string run_config, run_out;
  std::size_t jobs = 1;
  auto* run = app.add_subcommand("run", "Run the active learning experiment");
  run->add_option("--config", run_config, "Experiment JSON config")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--jobs", jobs, "Concurrent (strategy, repetition) runs")->check(CLI::PositiveNumber);

  std::string curves, baseline = "random", svg_dir, report_out;
  auto* report = app.add_subcommand("report", "Compute improvement curves from curves.csv");
  report->add_option("--curves", curves, "curves.csv from a run")->required();
  report->add_option("--baseline", baseline, "Baseline strategy");
  report->add_option("--svg", svg_dir, "Directory for SVG plots");
  report->add_option("--out", report_out, "improvement.csv path (default: next to curves.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_dir, std::cout, std::cerr);
    if (*synth) {
      cmd_synth(synth_config, synth_seed, synth_out);
      std::cout << "wrote " << synth_out << '\n';
    } else if (*run) {
      const auto r = cmd_run(run_config, run_out, jobs);
      std::cout << "wrote " << r.curves_csv.string() << " and " << r.improvement_csv.string() << '\n';
    } else if (*report) {
      std::optional<fs::path> svg, out;
      if (!svg_dir.empty()) svg = svg_dir;
      if (!report_out.empty()) out = report_out;
      std::cout << "wrote " << cmd_report(curves, baseline, svg, out).string() << '\n';
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace albird
