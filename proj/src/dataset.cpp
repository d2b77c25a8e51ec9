#include "albird/dataset.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "albird/error.hpp"
#include "albird/report.hpp"
#include "albird/rng.hpp"

namespace albird {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kInstancesHeader = "index,segment_id,recording_id,day,start_s,labels";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <class T>
T parse_number(std::string_view field, std::size_t line_no, std::string_view what) {
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(Errc::BadFormat, "instances.csv line " + std::to_string(line_no) + ": bad " + std::string(what) +
                                     " '" + std::string(field) + "'");
  }
  return value;
}

std::string to_chars_string(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

fs::path require_file(const fs::path& root, std::string_view name) {
  auto p = root / name;
  if (!fs::is_regular_file(p)) throw Error(Errc::MissingFile, p.string());
  return p;
}

}  // namespace

void EmbeddingDataset::validate() const {
  const std::size_t n = num_instances();
  const std::size_t c = num_classes();
  std::unordered_set<std::string_view> seen;
  for (const auto& name : class_names) {
    if (name.empty()) throw Error(Errc::BadFormat, "empty class name");
    if (!seen.insert(name).second) throw Error(Errc::BadFormat, "duplicate class name '" + name + "'");
  }
  if (labels.rows() != n || labels.cols() != c) {
    throw Error(Errc::SizeMismatch, "label matrix is " + std::to_string(labels.rows()) + "x" +
                                        std::to_string(labels.cols()) + ", expected " + std::to_string(n) + "x" +
                                        std::to_string(c));
  }
  if (meta.size() != n) throw Error(Errc::SizeMismatch, "metadata count differs from instance count");
  for (std::size_t i = 0; i < embeddings.values().size(); ++i) {
    if (!std::isfinite(embeddings.values()[i])) {
      throw Error(Errc::NonFiniteEmbedding, "instance " + std::to_string(i / dim()) + ", coordinate " +
                                                std::to_string(i % dim()));
    }
  }
  for (auto y : labels.values()) {
    if (y > 1) throw Error(Errc::BadFormat, "label entry outside {0,1}");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (meta[i].index != i) throw Error(Errc::DuplicateIndex, "metadata row " + std::to_string(i) + " has index " +
                                                                  std::to_string(meta[i].index));
    if (meta[i].day < 1) throw Error(Errc::BadFormat, "instance " + std::to_string(i) + " has day < 1");
    if (!(meta[i].start_s >= 0.0)) throw Error(Errc::BadFormat, "instance " + std::to_string(i) + " has start_s < 0");
  }
}

EmbeddingDataset load_dataset(const fs::path& root) {
  const auto manifest_path = require_file(root, "manifest.json");
  const auto embeddings_path = require_file(root, "embeddings.f32le");
  const auto instances_path = require_file(root, "instances.csv");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, "manifest.json: " + std::string(e.what()));
  }
  std::size_t n = 0, d = 0, c = 0;
  EmbeddingDataset ds;
  try {
    if (manifest.at("version").get<int>() != kDatasetFormatVersion) {
      throw Error(Errc::BadFormat, "manifest.json: unsupported version " + manifest.at("version").dump());
    }
    n = manifest.at("num_instances").get<std::size_t>();
    d = manifest.at("dim").get<std::size_t>();
    c = manifest.at("num_classes").get<std::size_t>();
    ds.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadFormat, "manifest.json: " + std::string(e.what()));
  }
  if (ds.class_names.size() != c) {
    throw Error(Errc::SizeMismatch, "manifest.json: class_names has " + std::to_string(ds.class_names.size()) +
                                        " entries, num_classes is " + std::to_string(c));
  }

  const auto expected_bytes = static_cast<std::uintmax_t>(n) * d * sizeof(float);
  const auto actual_bytes = fs::file_size(embeddings_path);
  if (actual_bytes != expected_bytes) {
    throw Error(Errc::SizeMismatch, "embeddings.f32le is " + std::to_string(actual_bytes) + " bytes, expected " +
                                        std::to_string(expected_bytes) + " (N*D*4)");
  }
  ds.embeddings = MatrixF(n, d);
  {
    std::ifstream in(embeddings_path, std::ios::binary);
    in.read(reinterpret_cast<char*>(ds.embeddings.values().data()), static_cast<std::streamsize>(expected_bytes));
    if (!in) throw Error(Errc::Io, "failed reading " + embeddings_path.string());
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : ds.embeddings.values()) {
        auto bits = std::bit_cast<std::uint32_t>(v);
        bits = __builtin_bswap32(bits);
        v = std::bit_cast<float>(bits);
      }
    }
  }

  ds.labels = LabelMatrix(n, c);
  ds.meta.resize(n);
  std::vector<bool> filled(n, false);
  std::istringstream lines(read_text_file(instances_path));
  std::string line;
  if (!std::getline(lines, line)) throw Error(Errc::BadFormat, "instances.csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kInstancesHeader) throw Error(Errc::BadFormat, "instances.csv: unexpected header '" + line + "'");
  std::size_t line_no = 1;
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) {
      throw Error(Errc::BadFormat, "instances.csv line " + std::to_string(line_no) + ": expected 6 fields, got " +
                                       std::to_string(fields.size()));
    }
    const auto index = parse_number<std::size_t>(fields[0], line_no, "index");
    if (index >= n) {
      throw Error(Errc::BadFormat, "instances.csv line " + std::to_string(line_no) + ": index " +
                                       std::to_string(index) + " >= N=" + std::to_string(n));
    }
    if (filled[index]) throw Error(Errc::DuplicateIndex, "index " + std::to_string(index) + " appears twice");
    filled[index] = true;
    ++rows;
    auto& m = ds.meta[index];
    m.index = index;
    m.segment_id = std::string(fields[1]);
    m.recording_id = std::string(fields[2]);
    m.day = parse_number<int>(fields[3], line_no, "day");
    m.start_s = parse_number<double>(fields[4], line_no, "start_s");
    if (!fields[5].empty()) {
      for (auto label : split(fields[5], ';')) {
        const auto cls = parse_number<std::size_t>(label, line_no, "label index");
        if (cls >= c) {
          throw Error(Errc::BadLabelIndex, "instances.csv line " + std::to_string(line_no) + ": label " +
                                               std::to_string(cls) + " >= C=" + std::to_string(c));
        }
        ds.labels(index, cls) = 1;
      }
    }
  }
  if (rows != n) {
    throw Error(Errc::SizeMismatch, "instances.csv has " + std::to_string(rows) + " rows, manifest says " +
                                        std::to_string(n));
  }
  ds.validate();
  return ds;
}

void write_dataset(const EmbeddingDataset& ds, const fs::path& root) {
  ds.validate();
  fs::create_directories(root);

  nlohmann::ordered_json manifest;
  manifest["version"] = kDatasetFormatVersion;
  manifest["num_instances"] = ds.num_instances();
  manifest["dim"] = ds.dim();
  manifest["num_classes"] = ds.num_classes();
  manifest["class_names"] = ds.class_names;
  write_file_atomic(root / "manifest.json", manifest.dump(2) + "\n");

  std::string bytes(ds.embeddings.values().size() * sizeof(float), '\0');
  std::memcpy(bytes.data(), ds.embeddings.values().data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) std::swap(bytes[i], bytes[i + 3]), std::swap(bytes[i + 1], bytes[i + 2]);
  }
  write_file_atomic(root / "embeddings.f32le", bytes);

  std::string csv(kInstancesHeader);
  csv += '\n';
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    const auto& m = ds.meta[i];
    csv += std::to_string(m.index) + ',' + m.segment_id + ',' + m.recording_id + ',' + std::to_string(m.day) + ',' +
           to_chars_string(m.start_s) + ',';
    bool first = true;
    for (std::size_t c = 0; c < ds.num_classes(); ++c) {
      if (!ds.labels(i, c)) continue;
      if (!first) csv += ';';
      csv += std::to_string(c);
      first = false;
    }
    csv += '\n';
  }
  write_file_atomic(root / "instances.csv", csv);
}

PoolTestSplit split_pool_test(const EmbeddingDataset& ds, const SplitSpec& spec) {
  if (spec.pool_days.empty() || spec.test_days.empty()) throw Error(Errc::InvalidConfig, "pool_days and test_days must be non-empty");
  for (int day : spec.pool_days) {
    if (spec.test_days.contains(day)) {
      throw Error(Errc::InvalidConfig, "day " + std::to_string(day) + " is in both pool_days and test_days");
    }
  }
  PoolTestSplit out;
  for (const auto& m : ds.meta) {
    if (spec.pool_days.contains(m.day)) {
      out.pool.push_back(m.index);
    } else if (spec.test_days.contains(m.day)) {
      out.test.push_back(m.index);
    } else {
      throw Error(Errc::UnassignedDay, "instance " + std::to_string(m.index) + " has day " + std::to_string(m.day) +
                                           " in neither pool_days nor test_days");
    }
  }
  if (out.pool.empty() || out.test.empty()) {
    throw Error(Errc::EmptySplit, "pool has " + std::to_string(out.pool.size()) + " and test has " +
                                      std::to_string(out.test.size()) + " instances");
  }
  return out;
}

void l2_normalize_rows(EmbeddingDataset& ds) {
  for (std::size_t i = 0; i < ds.num_instances(); ++i) {
    auto row = ds.embeddings.row(i);
    const double norm = std::sqrt(dot(row, row));
    if (norm == 0.0) continue;
    for (auto& v : row) v = static_cast<float>(v / norm);
  }
}

EmbeddingDataset synth_dataset(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_instances < 1 || cfg.dim < 1 || cfg.num_classes < 1 || cfg.num_clusters < 1 ||
      cfg.num_clusters > cfg.num_instances || !(cfg.noise >= 0.0) || !std::isfinite(cfg.noise)) {
    throw Error(Errc::InvalidConfig, "synth config needs N >= G >= 1, D >= 1, C >= 1 and finite noise >= 0");
  }
  Rng rng(seed);
  const std::size_t n = cfg.num_instances, d = cfg.dim, c = cfg.num_classes, g = cfg.num_clusters;

  MatrixD centers(g, d);
  for (auto& v : centers.values()) v = rng.uniform(-1.0, 1.0);

  // Each cluster carries 1..2 distinct classes (1 when C == 1).
  LabelMatrix cluster_labels(g, c);
  for (std::size_t k = 0; k < g; ++k) {
    const std::size_t count = std::min<std::size_t>(1 + rng.below(2), c);
    std::vector<std::size_t> classes(c);
    for (std::size_t j = 0; j < c; ++j) classes[j] = j;
    for (std::size_t j = 0; j < count; ++j) {
      const auto pick = j + rng.below(c - j);
      std::swap(classes[j], classes[pick]);
      cluster_labels(k, classes[j]) = 1;
    }
  }

  EmbeddingDataset ds;
  for (std::size_t j = 0; j < c; ++j) ds.class_names.push_back("class_" + std::to_string(j));
  ds.embeddings = MatrixF(n, d);
  ds.labels = LabelMatrix(n, c);
  ds.meta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(rng.below(g));
    for (std::size_t j = 0; j < d; ++j) {
      const double noise = cfg.noise * rng.normal();
      ds.embeddings(i, j) = static_cast<float>(centers(k, j) + noise);
    }
    for (std::size_t j = 0; j < c; ++j) ds.labels(i, j) = cluster_labels(k, j);
    auto& m = ds.meta[i];
    m.index = i;
    m.day = 1 + static_cast<int>(i % 2);
    m.recording_id = "synth_day" + std::to_string(m.day);
    m.segment_id = "seg" + std::to_string(i);
    m.start_s = 5.0 * static_cast<double>(i / 2);
  }
  return ds;
}

}  // namespace albird
