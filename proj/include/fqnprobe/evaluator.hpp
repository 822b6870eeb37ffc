#pragma once

// Scoring and reporting: overall, per-shot, per-configuration and
// property-stratified accuracy, plus the three per-instance accuracy
// variants (individuals, majority-win, any-correct).

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fqnprobe/composer.hpp"
#include "fqnprobe/corpus.hpp"
#include "fqnprobe/normalizer.hpp"
#include "fqnprobe/rng.hpp"

namespace fqnprobe {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One scored outcome with its full configuration coordinates.
struct PredictionRecord {
  std::string snippet_id;
  std::string simple_name;
  std::string gold_fqn;
  std::string predicted_fqn;
  bool correct = false;
  ShotSetting shot;
  std::string config_id;
  std::uint64_t seed = 0;
};

struct Cell {
  std::int64_t correct = 0;
  std::int64_t total = 0;

  bool empty() const { return total == 0; }
  double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
  void add(bool was_correct) {
    ++total;
    if (was_correct) ++correct;
  }
  friend bool operator==(const Cell&, const Cell&) = default;
};

using ShotCells = std::array<Cell, kShotCount>;

enum class Dimension { Length = 0, Usage, SnFqn, FqnSn };

inline constexpr int kDimensionCount = 4;

inline std::string_view dimension_name(Dimension d) {
  switch (d) {
    case Dimension::Length: return "length";
    case Dimension::Usage: return "usage";
    case Dimension::SnFqn: return "sn_fqn";
    case Dimension::FqnSn: return "fqn_sn";
  }
  return "length";
}

inline std::string_view bucket_label(Dimension d, int bucket) {
  switch (d) {
    case Dimension::Length: return label(static_cast<LengthBucket>(bucket));
    case Dimension::Usage: return label(static_cast<UsageBucket>(bucket));
    default: return label(static_cast<CardinalityBucket>(bucket));
  }
}

struct ConfigReport {
  ShotCells overall{};
  /// [dimension][bucket] -> per-shot cells.
  std::array<std::array<ShotCells, kBucketCount>, kDimensionCount> matrix{};
  std::map<std::string, ShotCells> by_library;

  friend bool operator==(const ConfigReport&, const ConfigReport&) = default;
};

struct StratifiedReport {
  std::map<std::string, ConfigReport> by_config;
  /// Optional presentation metadata (not part of report equality).
  std::map<std::string, std::string> config_labels;
  std::string baseline_config_id;

  friend bool operator==(const StratifiedReport& a, const StratifiedReport& b) {
    return a.by_config == b.by_config;
  }
};

/// Aggregates records into the stratified report. Stratification follows the
/// target: length and usage buckets come from the gold FQN's stats, SN:FQN
/// from the target's base simple name, FQN:SN from the gold FQN.
inline StratifiedReport evaluate(const std::vector<PredictionRecord>& records,
                                 const CorpusStats& stats) {
  StratifiedReport report;
  for (const PredictionRecord& r : records) {
    const FqnStats* fqn_stats = stats.find(r.gold_fqn);
    if (!fqn_stats) {
      throw EvalError("record with unknown gold FQN: " + r.gold_fqn + " (snippet " +
                      r.snippet_id + ", name " + r.simple_name + ")");
    }
    const int base_card = stats.sn_fqn_of_base(base_name(r.simple_name));
    if (base_card == 0) {
      throw EvalError("record with unknown simple name: " + r.simple_name + " (snippet " +
                      r.snippet_id + ")");
    }
    ConfigReport& config_report = report.by_config[r.config_id];
    const int shot = static_cast<int>(r.shot.kind);
    config_report.overall[shot].add(r.correct);

    const PropertyBuckets buckets = bucketize(*fqn_stats);
    config_report.matrix[static_cast<int>(Dimension::Length)]
                        [static_cast<int>(buckets.length_bucket)][shot]
                            .add(r.correct);
    config_report.matrix[static_cast<int>(Dimension::Usage)]
                        [static_cast<int>(buckets.usage_bucket)][shot]
                            .add(r.correct);
    config_report.matrix[static_cast<int>(Dimension::SnFqn)]
                        [static_cast<int>(cardinality_bucket(base_card))][shot]
                            .add(r.correct);
    config_report.matrix[static_cast<int>(Dimension::FqnSn)]
                        [static_cast<int>(cardinality_bucket(fqn_stats->fqn_sn))][shot]
                            .add(r.correct);

    auto lib = stats.snippet_library.find(r.snippet_id);
    const std::string library = lib == stats.snippet_library.end() ? "unknown" : lib->second;
    config_report.by_library[library][shot].add(r.correct);
  }
  return report;
}

/// The three accuracy variants over per-instance records grouped by
/// (snippet, simple name).
struct AccuracyVariants {
  double individuals = 0.0;
  double majority_win = 0.0;
  double any_correct = 0.0;
  std::int64_t instances = 0;
  std::int64_t unique_names = 0;
};

/// individuals: accuracy over all instances. majority_win: one vote per
/// unique name using the modal prediction, ties broken by a seeded pick.
/// any_correct: a unique name counts when any instance was correct.
inline AccuracyVariants accuracy_variants(const std::vector<PredictionRecord>& records,
                                          std::uint64_t seed) {
  if (records.empty()) throw EvalError("accuracy_variants: no records");

  std::map<std::string, std::vector<const PredictionRecord*>> groups;
  std::int64_t correct_instances = 0;
  for (const PredictionRecord& r : records) {
    groups[r.snippet_id + "\x1f" + r.simple_name].push_back(&r);
    if (r.correct) ++correct_instances;
  }

  std::int64_t majority_correct = 0;
  std::int64_t any_correct_count = 0;
  for (const auto& [key, group] : groups) {
    std::map<std::string, int> votes;
    bool any = false;
    for (const PredictionRecord* r : group) {
      ++votes[r->predicted_fqn];
      if (r->correct) any = true;
    }
    if (any) ++any_correct_count;

    int best = 0;
    for (const auto& [prediction, count] : votes) best = std::max(best, count);
    std::vector<const std::string*> tied;
    for (const auto& [prediction, count] : votes) {
      if (count == best) tied.push_back(&prediction);
    }
    const std::string* winner = tied.front();
    if (tied.size() > 1) {
      SplitMix64 rng = derive_rng(seed, key);
      winner = tied[rng.below(tied.size())];
    }
    if (is_correct(*winner, group.front()->gold_fqn)) ++majority_correct;
  }

  AccuracyVariants out;
  out.instances = static_cast<std::int64_t>(records.size());
  out.unique_names = static_cast<std::int64_t>(groups.size());
  out.individuals = static_cast<double>(correct_instances) / out.instances;
  out.majority_win = static_cast<double>(majority_correct) / out.unique_names;
  out.any_correct = static_cast<double>(any_correct_count) / out.unique_names;
  return out;
}

namespace detail {

inline std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", fraction * 100.0);
  return std::string(buf);
}

inline std::string signed_percent(double delta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f", delta * 100.0);
  return std::string(buf);
}

// Interval-style bucket labels contain commas, so fields are quoted when
// needed and the parser understands quotes.
inline std::string csv_field(std::string_view value) {
  if (value.find(',') == std::string_view::npos &&
      value.find('"') == std::string_view::npos) {
    return std::string(value);
  }
  std::string quoted = "\"";
  for (char c : value) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

}  // namespace detail

/// CSV: one row per non-empty cell. Empty cells are absent, never 0%.
inline std::string report_to_csv(const StratifiedReport& report) {
  std::ostringstream out;
  out << "config_id,shot,dimension,bucket,correct,total,accuracy\n";
  auto row = [&](const std::string& config, int shot, std::string_view dim,
                 std::string_view bucket, const Cell& cell) {
    if (cell.empty()) return;
    out << detail::csv_field(config) << ',' << shot_name(static_cast<ShotKind>(shot)) << ','
        << dim << ',' << detail::csv_field(bucket) << ',' << cell.correct << ',' << cell.total
        << ',' << detail::percent(cell.accuracy()) << '\n';
  };
  for (const auto& [config, cr] : report.by_config) {
    for (int shot = 0; shot < kShotCount; ++shot) {
      row(config, shot, "overall", "all", cr.overall[shot]);
    }
    for (int d = 0; d < kDimensionCount; ++d) {
      for (int b = 0; b < kBucketCount; ++b) {
        for (int shot = 0; shot < kShotCount; ++shot) {
          row(config, shot, dimension_name(static_cast<Dimension>(d)),
              bucket_label(static_cast<Dimension>(d), b), cr.matrix[d][b][shot]);
        }
      }
    }
    for (const auto& [library, cells] : cr.by_library) {
      for (int shot = 0; shot < kShotCount; ++shot) {
        row(config, shot, "library", library, cells[shot]);
      }
    }
  }
  return out.str();
}

/// Parses a CSV produced by report_to_csv back into a report.
inline StratifiedReport parse_report_csv(std::istream& in) {
  StratifiedReport report;
  std::string line;
  if (!std::getline(in, line)) throw EvalError("empty report CSV");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 7) {
      throw EvalError("report CSV line " + std::to_string(line_no) + ": expected 7 fields");
    }
    const auto shot = shot_from_name(fields[1]);
    if (!shot) throw EvalError("report CSV line " + std::to_string(line_no) + ": bad shot");
    Cell cell;
    cell.correct = std::stoll(fields[4]);
    cell.total = std::stoll(fields[5]);
    ConfigReport& cr = report.by_config[fields[0]];
    const int s = static_cast<int>(*shot);
    const std::string& dim = fields[2];
    if (dim == "overall") {
      cr.overall[s] = cell;
    } else if (dim == "library") {
      cr.by_library[fields[3]][s] = cell;
    } else {
      int d = -1;
      for (int i = 0; i < kDimensionCount; ++i) {
        if (dimension_name(static_cast<Dimension>(i)) == dim) d = i;
      }
      if (d < 0) throw EvalError("report CSV line " + std::to_string(line_no) + ": bad dimension");
      int b = -1;
      for (int i = 0; i < kBucketCount; ++i) {
        if (bucket_label(static_cast<Dimension>(d), i) == fields[3]) b = i;
      }
      if (b < 0) throw EvalError("report CSV line " + std::to_string(line_no) + ": bad bucket");
      cr.matrix[d][b][s] = cell;
    }
  }
  return report;
}

inline StratifiedReport parse_report_csv(const std::string& csv) {
  std::istringstream in(csv);
  return parse_report_csv(in);
}

/// Markdown report: a configuration table (deltas against the baseline when
/// one is set) and one bucket-by-shot table per stratification dimension.
inline std::string report_to_markdown(const StratifiedReport& report) {
  std::ostringstream out;
  auto config_title = [&](const std::string& id) {
    auto it = report.config_labels.find(id);
    return it == report.config_labels.end() ? id : it->second + " (" + id + ")";
  };
  auto cell_text = [](const Cell& cell) {
    return cell.empty() ? std::string("—") : detail::percent(cell.accuracy()) + "%";
  };

  out << "# Accuracy report\n\n## Configurations\n\n";
  out << "| Configuration |";
  for (int shot = 0; shot < kShotCount; ++shot) {
    out << ' ' << shot_name(static_cast<ShotKind>(shot)) << " |";
  }
  out << "\n|---|";
  for (int shot = 0; shot < kShotCount; ++shot) out << "---|";
  out << '\n';

  const ConfigReport* baseline = nullptr;
  if (auto it = report.by_config.find(report.baseline_config_id); it != report.by_config.end()) {
    baseline = &it->second;
  }
  for (const auto& [config, cr] : report.by_config) {
    out << "| " << config_title(config) << " |";
    const bool is_baseline = baseline && config == report.baseline_config_id;
    for (int shot = 0; shot < kShotCount; ++shot) {
      const Cell& cell = cr.overall[shot];
      if (cell.empty()) {
        out << " — |";
      } else if (!baseline || is_baseline || baseline->overall[shot].empty()) {
        out << ' ' << detail::percent(cell.accuracy()) << "% |";
      } else {
        out << ' '
            << detail::signed_percent(cell.accuracy() - baseline->overall[shot].accuracy())
            << "% |";
      }
    }
    out << '\n';
  }

  for (const auto& [config, cr] : report.by_config) {
    out << "\n## Stratified accuracy: " << config_title(config) << "\n";
    for (int d = 0; d < kDimensionCount; ++d) {
      out << "\n### " << dimension_name(static_cast<Dimension>(d)) << "\n\n| Range |";
      for (int shot = 0; shot < kShotCount; ++shot) {
        out << ' ' << shot_name(static_cast<ShotKind>(shot)) << " |";
      }
      out << "\n|---|";
      for (int shot = 0; shot < kShotCount; ++shot) out << "---|";
      out << '\n';
      // Usage rows print most-frequent first, mirroring the familiar layout.
      std::vector<int> order = {0, 1, 2, 3};
      if (static_cast<Dimension>(d) == Dimension::Usage) order = {3, 2, 1, 0};
      for (int b : order) {
        out << "| " << bucket_label(static_cast<Dimension>(d), b) << " |";
        for (int shot = 0; shot < kShotCount; ++shot) {
          out << ' ' << cell_text(cr.matrix[d][b][shot]) << " |";
        }
        out << '\n';
      }
    }
    if (!cr.by_library.empty()) {
      out << "\n### by library\n\n| Library |";
      for (int shot = 0; shot < kShotCount; ++shot) {
        out << ' ' << shot_name(static_cast<ShotKind>(shot)) << " |";
      }
      out << "\n|---|";
      for (int shot = 0; shot < kShotCount; ++shot) out << "---|";
      out << '\n';
      for (const auto& [library, cells] : cr.by_library) {
        out << "| " << library << " |";
        for (int shot = 0; shot < kShotCount; ++shot) {
          out << ' ' << cell_text(cells[shot]) << " |";
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

enum class ReportFormat { Csv, Markdown };

/// Writes the report files; returns the paths written.
inline std::vector<std::filesystem::path> emit_report(
    const StratifiedReport& report, const std::vector<ReportFormat>& formats,
    const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::vector<std::filesystem::path> written;
  for (ReportFormat format : formats) {
    const auto path = out_dir / (format == ReportFormat::Csv ? "report.csv" : "report.md");
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write report: " + path.string());
    out << (format == ReportFormat::Csv ? report_to_csv(report) : report_to_markdown(report));
    written.push_back(path);
  }
  return written;
}

/// One completed-prediction line: {file, raw, normalized, correct}.
struct PredictionLine {
  std::string file;
  std::string raw;
  std::string normalized;
  bool correct = false;
};

inline void write_predictions(const std::vector<PredictionLine>& predictions,
                              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EvalError("cannot write predictions: " + path.string());
  for (const PredictionLine& p : predictions) {
    nlohmann::ordered_json obj;
    obj["file"] = p.file;
    obj["raw"] = p.raw;
    obj["normalized"] = p.normalized;
    obj["correct"] = p.correct;
    out << obj.dump() << '\n';
  }
}

inline std::vector<PredictionLine> load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError("cannot open predictions: " + path.string());
  std::vector<PredictionLine> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      PredictionLine p;
      p.file = obj.at("file").get<std::string>();
      p.raw = obj.at("raw").get<std::string>();
      p.normalized = obj.at("normalized").get<std::string>();
      p.correct = obj.at("correct").get<bool>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw EvalError("predictions line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// Joins manifest records with scored predictions on the file path.
inline std::vector<PredictionRecord> join_predictions(const Manifest& manifest,
                                                      const std::vector<PredictionLine>& lines) {
  std::map<std::string, const PredictionLine*> by_file;
  for (const PredictionLine& p : lines) by_file[p.file] = &p;
  std::vector<PredictionRecord> records;
  records.reserve(manifest.records.size());
  for (const TaskRecord& r : manifest.records) {
    auto it = by_file.find(r.file);
    if (it == by_file.end()) continue;
    PredictionRecord record;
    record.snippet_id = r.snippet_id;
    record.simple_name = r.target;
    record.gold_fqn = r.gold_fqn;
    record.predicted_fqn = it->second->normalized;
    record.correct = is_correct(record.predicted_fqn, record.gold_fqn);
    record.shot = r.shot;
    record.config_id = r.config_id;
    record.seed = r.seed;
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace fqnprobe
