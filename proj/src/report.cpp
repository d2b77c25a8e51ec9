#include "albird/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "albird/error.hpp"

namespace albird {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(Errc::InvalidConfig, where + ": " + what);
}

json parse_json_text(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports "at line L, column C" in the message.
    throw Error(Errc::InvalidConfig, std::string(what) + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) config_error(where, "expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) config_error(where, "unknown key '" + key + "'");
  }
}

template <class T>
void read_field(const json& obj, const char* key, T& dst, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) config_error(where + "." + key, "expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) config_error(where + "." + key, "expected true or false");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) config_error(where + "." + key, "expected a number");
    }
    dst = it->get<T>();
  } catch (const json::exception& e) {
    config_error(where + "." + key, e.what());
  }
}

std::set<int> read_days(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) config_error(where + "." + key, "expected an array of day numbers");
  std::set<int> days;
  for (const auto& v : *it) {
    if (!v.is_number_integer() || v.get<int>() < 1) config_error(where + "." + key, "days are integers >= 1");
    days.insert(v.get<int>());
  }
  return days;
}

template <class T>
T parse_field(std::string_view field, std::size_t line_no, std::string_view name) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw Error(Errc::BadFormat, "line " + std::to_string(line_no) + ": bad " + std::string(name) + " '" +
                                     std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = line.find(',', start)) != std::string_view::npos; start = pos + 1) {
    out.push_back(line.substr(start, pos - start));
  }
  out.push_back(line.substr(start));
  return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view json_text, const fs::path& base_dir) {
  const json root = parse_json_text(json_text, "config");
  reject_unknown_keys(root,
                      {"dataset", "split", "strategies", "initial_size", "batch_b", "num_cycles", "repetitions",
                       "master_seed", "normalize", "train"},
                      "config");
  ExperimentConfig cfg;
  const auto ds = root.find("dataset");
  if (ds == root.end() || !ds->is_string() || ds->get<std::string>().empty()) {
    config_error("config.dataset", "required string path");
  }
  cfg.dataset = ds->get<std::string>();
  if (cfg.dataset.is_relative() && !base_dir.empty()) cfg.dataset = base_dir / cfg.dataset;
  cfg.dataset = cfg.dataset.lexically_normal();

  const auto split = root.find("split");
  if (split == root.end()) config_error("config.split", "required object with pool_days and test_days");
  reject_unknown_keys(*split, {"pool_days", "test_days"}, "config.split");
  cfg.split.pool_days = read_days(*split, "pool_days", "config.split");
  cfg.split.test_days = read_days(*split, "test_days", "config.split");

  if (const auto st = root.find("strategies"); st != root.end()) {
    if (!st->is_array()) config_error("config.strategies", "expected an array of strategy names");
    cfg.strategies.clear();
    for (const auto& v : *st) {
      if (!v.is_string()) config_error("config.strategies", "expected strategy names as strings");
      cfg.strategies.push_back(parse_strategy(v.get<std::string>()));
    }
  }
  read_field(root, "initial_size", cfg.initial_size, "config");
  read_field(root, "batch_b", cfg.batch_size, "config");
  read_field(root, "num_cycles", cfg.num_cycles, "config");
  read_field(root, "repetitions", cfg.repetitions, "config");
  read_field(root, "master_seed", cfg.master_seed, "config");
  read_field(root, "normalize", cfg.normalize, "config");
  if (const auto tr = root.find("train"); tr != root.end()) {
    reject_unknown_keys(*tr,
                        {"epochs", "batch_size", "lr_max", "lr_min", "weight_decay", "beta1", "beta2", "epsilon"},
                        "config.train");
    read_field(*tr, "epochs", cfg.train.epochs, "config.train");
    read_field(*tr, "batch_size", cfg.train.batch_size, "config.train");
    read_field(*tr, "lr_max", cfg.train.lr_max, "config.train");
    read_field(*tr, "lr_min", cfg.train.lr_min, "config.train");
    read_field(*tr, "weight_decay", cfg.train.weight_decay, "config.train");
    read_field(*tr, "beta1", cfg.train.beta1, "config.train");
    read_field(*tr, "beta2", cfg.train.beta2, "config.train");
    read_field(*tr, "epsilon", cfg.train.epsilon, "config.train");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return parse_experiment_config(read_text_file(path), path.parent_path());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["dataset"] = cfg.dataset.generic_string();
  j["split"]["pool_days"] = cfg.split.pool_days;
  j["split"]["test_days"] = cfg.split.test_days;
  j["strategies"] = json::array();
  for (auto s : cfg.strategies) j["strategies"].push_back(std::string(strategy_name(s)));
  j["initial_size"] = cfg.initial_size;
  j["batch_b"] = cfg.batch_size;
  j["num_cycles"] = cfg.num_cycles;
  j["repetitions"] = cfg.repetitions;
  j["master_seed"] = cfg.master_seed;
  j["normalize"] = cfg.normalize;
  auto& t = j["train"];
  t["epochs"] = cfg.train.epochs;
  t["batch_size"] = cfg.train.batch_size;
  t["lr_max"] = cfg.train.lr_max;
  t["lr_min"] = cfg.train.lr_min;
  t["weight_decay"] = cfg.train.weight_decay;
  t["beta1"] = cfg.train.beta1;
  t["beta2"] = cfg.train.beta2;
  t["epsilon"] = cfg.train.epsilon;
  return j.dump(2) + "\n";
}

SynthConfig parse_synth_config(std::string_view json_text) {
  const json root = parse_json_text(json_text, "synth config");
  reject_unknown_keys(root, {"num_instances", "dim", "num_classes", "num_clusters", "noise"}, "synth");
  SynthConfig cfg;
  read_field(root, "num_instances", cfg.num_instances, "synth");
  read_field(root, "dim", cfg.dim, "synth");
  read_field(root, "num_classes", cfg.num_classes, "synth");
  read_field(root, "num_clusters", cfg.num_clusters, "synth");
  read_field(root, "noise", cfg.noise, "synth");
  return cfg;
}

SynthConfig load_synth_config(const fs::path& path) { return parse_synth_config(read_text_file(path)); }

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string curves_to_csv(const LearningCurve& curve) {
  std::string out(kCurvesHeader);
  out += '\n';
  for (const auto& r : curve) {
    out += std::string(strategy_name(r.strategy)) + ',' + std::to_string(r.repetition) + ',' +
           std::to_string(r.cycle) + ',' + std::to_string(r.labeled_count) + ',' + format_float(r.metrics.cmap) + ',' +
           format_float(r.metrics.auroc) + ',' + format_float(r.metrics.t1acc) + ',' +
           std::to_string(r.metrics.evaluated_instances) + ',' + std::to_string(r.metrics.skipped_classes) + '\n';
  }
  return out;
}

LearningCurve parse_curves_csv(std::string_view text) {
  LearningCurve curve;
  std::size_t line_no = 0;
  bool header = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != kCurvesHeader) throw Error(Errc::BadFormat, "curves.csv: unexpected header '" + std::string(line) + "'");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 9) {
      throw Error(Errc::BadFormat, "curves.csv line " + std::to_string(line_no) + ": expected 9 fields");
    }
    CurveRow r;
    r.strategy = parse_strategy(f[0]);
    r.repetition = parse_field<std::size_t>(f[1], line_no, "repetition");
    r.cycle = parse_field<std::size_t>(f[2], line_no, "cycle");
    r.labeled_count = parse_field<std::size_t>(f[3], line_no, "labeled_count");
    r.metrics.cmap = parse_field<double>(f[4], line_no, "cmap");
    r.metrics.auroc = parse_field<double>(f[5], line_no, "auroc");
    r.metrics.t1acc = parse_field<double>(f[6], line_no, "t1acc");
    r.metrics.evaluated_instances = parse_field<std::size_t>(f[7], line_no, "evaluated_instances");
    r.metrics.skipped_classes = parse_field<std::size_t>(f[8], line_no, "skipped_classes");
    curve.push_back(r);
  }
  if (header) throw Error(Errc::BadFormat, "curves.csv is empty");
  return curve;
}

std::string improvement_to_csv(const std::vector<ImprovementRow>& rows) {
  std::string out(kImprovementHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::string(strategy_name(r.strategy)) + ',' + std::string(metric_name(r.metric)) + ',' +
           std::to_string(r.cycle) + ',' + std::to_string(r.labeled_count) + ',' + format_float(r.abs_delta) + ',' +
           (r.rel_percent ? format_float(*r.rel_percent) : std::string()) + '\n';
  }
  return out;
}

std::string improvement_svg(const std::vector<ImprovementRow>& rows, Metric metric, std::string_view baseline) {
  constexpr double width = 640, height = 400, left = 60, right = 130, top = 40, bottom = 50;
  constexpr std::array<const char*, 6> colors = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::vector<Strategy> order;
  std::map<Strategy, std::vector<std::pair<double, double>>> series;
  double x_min = INFINITY, x_max = -INFINITY, y_min = 0.0, y_max = 0.0;
  for (const auto& r : rows) {
    if (r.metric != metric || !r.rel_percent) continue;
    if (!series.contains(r.strategy)) order.push_back(r.strategy);
    const auto x = static_cast<double>(r.labeled_count);
    series[r.strategy].emplace_back(x, *r.rel_percent);
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
    y_min = std::min(y_min, *r.rel_percent);
    y_max = std::max(y_max, *r.rel_percent);
  }
  if (order.empty()) x_min = 0, x_max = 1;
  if (x_max == x_min) x_max = x_min + 1;
  if (y_max == y_min) y_max = y_min + 1;
  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return top + (y_max - y) / (y_max - y_min) * ph; };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
                    "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + num(left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
         std::string(metric_name(metric)) + ": improvement over " + std::string(baseline) + " (%)</text>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(top + ph) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top + ph) +
         "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(sy(0.0)) + "\" x2=\"" + num(left + pw) + "\" y2=\"" +
         num(sy(0.0)) + "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(height - 12) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">labeled instances</text>\n";
  for (double v : {y_min, y_max}) {
    svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(sy(v) + 4) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + num(v) + "</text>\n";
  }
  for (double v : {x_min, x_max}) {
    svg += "<text x=\"" + num(sx(v)) + "\" y=\"" + num(top + ph + 14) +
           "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" + num(v) + "</text>\n";
  }
  for (std::size_t s = 0; s < order.size(); ++s) {
    const char* color = colors[s % colors.size()];
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" data-strategy=\"" +
           std::string(strategy_name(order[s])) + "\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[order[s]]) {
      if (!first) svg += ' ';
      svg += num(sx(x)) + "," + num(sy(y));
      first = false;
    }
    svg += "\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s);
    svg += "<text x=\"" + num(left + pw + 10) + "\" y=\"" + num(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" +
           std::string(color) + "\">" + std::string(strategy_name(order[s])) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace albird
