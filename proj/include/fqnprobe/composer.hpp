#pragma once

// Task-input composition: renders example and to-be-complete prompt lines for
// every combination of shot setting and prompt-engineering configuration, and
// writes batched input trees with a manifest.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fqnprobe/corpus.hpp"
#include "fqnprobe/names.hpp"
#include "fqnprobe/rng.hpp"

namespace fqnprobe {

class ComposeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a snippet cannot satisfy a shot setting (too few pairs).
class ShotInfeasibleError : public ComposeError {
 public:
  ShotInfeasibleError(const std::string& snippet_id, std::string_view shot)
      : ComposeError("shot infeasible: " + std::string(shot) + " on snippet " + snippet_id),
        snippet_id_(snippet_id) {}
  const std::string& snippet_id() const { return snippet_id_; }

 private:
  std::string snippet_id_;
};

enum class TaskDescription { None, Concise, Verbose };
enum class PromptTemplate { Description, Symbol };
enum class ExampleOrder { Random, FrequentFirst, InfrequentFirst };
enum class OneShotSelection { Random, MostUsed };

inline constexpr std::string_view kConciseDescription = "type inference";
inline constexpr std::string_view kVerboseDescription =
    "parse simple name to fully qualified name";
inline constexpr std::string_view kMappingArrow = "→";  // →

struct PromptConfig {
  bool code_context = true;
  TaskDescription task_description = TaskDescription::Verbose;
  PromptTemplate prompt_template = PromptTemplate::Description;
  ExampleOrder example_order = ExampleOrder::Random;
  bool identifier_quotes = true;
  bool blank_line_after_context = false;
  OneShotSelection one_shot_selection = OneShotSelection::Random;
  std::uint64_t seed = 0;
};

/// The Basic preset: code context, verbose description, description template,
/// random example order, quoted identifiers.
inline PromptConfig basic_config(std::uint64_t seed = 0) {
  PromptConfig c;
  c.seed = seed;
  return c;
}

/// The Best preset: Basic with a concise description and infrequent-first
/// example order.
inline PromptConfig best_config(std::uint64_t seed = 0) {
  PromptConfig c = basic_config(seed);
  c.task_description = TaskDescription::Concise;
  c.example_order = ExampleOrder::InfrequentFirst;
  return c;
}

/// The nine-configuration ablation set: Basic, Best, and Basic with one
/// factor varied at a time.
inline std::vector<std::pair<std::string, PromptConfig>> ablation_configs(
    std::uint64_t seed = 0) {
  std::vector<std::pair<std::string, PromptConfig>> out;
  out.emplace_back("basic", basic_config(seed));
  out.emplace_back("best", best_config(seed));
  PromptConfig c = basic_config(seed);
  c.code_context = false;
  out.emplace_back("no-context", c);
  c = basic_config(seed);
  c.task_description = TaskDescription::Concise;
  out.emplace_back("desc-concise", c);
  c = basic_config(seed);
  c.task_description = TaskDescription::None;
  out.emplace_back("desc-none", c);
  c = basic_config(seed);
  c.prompt_template = PromptTemplate::Symbol;
  out.emplace_back("template-symbol", c);
  c = basic_config(seed);
  c.example_order = ExampleOrder::FrequentFirst;
  out.emplace_back("order-frequent-first", c);
  c = basic_config(seed);
  c.example_order = ExampleOrder::InfrequentFirst;
  out.emplace_back("order-infrequent-first", c);
  c = basic_config(seed);
  c.identifier_quotes = false;
  out.emplace_back("no-quotes", c);
  return out;
}

/// Stable 16-hex-digit id over every configuration field.
inline std::string config_id(const PromptConfig& c) {
  std::ostringstream key;
  key << "ctx=" << c.code_context << ";desc=" << static_cast<int>(c.task_description)
      << ";tmpl=" << static_cast<int>(c.prompt_template)
      << ";order=" << static_cast<int>(c.example_order) << ";quotes=" << c.identifier_quotes
      << ";blank=" << c.blank_line_after_context
      << ";one=" << static_cast<int>(c.one_shot_selection) << ";seed=" << c.seed;
  const std::uint64_t h = fnv1a64(key.str());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

enum class ShotKind { Zero = 0, OneEnic, One, FewRep, FewLoo };

inline constexpr int kShotCount = 5;
inline constexpr ShotKind kAllShots[kShotCount] = {ShotKind::Zero, ShotKind::OneEnic,
                                                   ShotKind::One, ShotKind::FewRep,
                                                   ShotKind::FewLoo};

struct ShotSetting {
  ShotKind kind = ShotKind::Zero;
  std::optional<int> k;  ///< explicit example count for FewRep

  static ShotSetting zero() { return {ShotKind::Zero, std::nullopt}; }
  static ShotSetting one_enic() { return {ShotKind::OneEnic, std::nullopt}; }
  static ShotSetting one() { return {ShotKind::One, std::nullopt}; }
  static ShotSetting few_rep(std::optional<int> k = std::nullopt) {
    return {ShotKind::FewRep, k};
  }
  static ShotSetting few_loo() { return {ShotKind::FewLoo, std::nullopt}; }
};

inline std::string_view shot_name(ShotKind kind) {
  switch (kind) {
    case ShotKind::Zero: return "zero";
    case ShotKind::OneEnic: return "one-enic";
    case ShotKind::One: return "one";
    case ShotKind::FewRep: return "few-rep";
    case ShotKind::FewLoo: return "few-loo";
  }
  return "zero";
}

inline std::optional<ShotKind> shot_from_name(std::string_view name) {
  if (name == "zero") return ShotKind::Zero;
  if (name == "one-enic") return ShotKind::OneEnic;
  if (name == "one") return ShotKind::One;
  if (name == "few-rep") return ShotKind::FewRep;
  if (name == "few-loo") return ShotKind::FewLoo;
  return std::nullopt;
}

/// One example line: the full simplename-FQN mapping.
inline std::string render_example(const NamePair& pair, const PromptConfig& config) {
  std::string sn = pair.simple_name;
  std::string fqn = pair.fqn;
  if (config.identifier_quotes) {
    sn = "\"" + sn + "\"";
    fqn = "\"" + fqn + "\"";
  }
  if (config.prompt_template == PromptTemplate::Description) {
    return "// the fully qualified name of " + sn + " is " + fqn;
  }
  return "// " + sn + " " + std::string(kMappingArrow) + " " + fqn;
}

/// The to-be-complete line: the example template truncated right before the
/// FQN slot.
inline std::string render_query(std::string_view simple_name, const PromptConfig& config) {
  std::string sn(simple_name);
  if (config.identifier_quotes) sn = "\"" + sn + "\"";
  if (config.prompt_template == PromptTemplate::Description) {
    return "// the fully qualified name of " + sn + " is";
  }
  return "// " + sn + " " + std::string(kMappingArrow);
}

/// Fixed external pairs for one-shot-ENIC, tried in order until one whose
/// base name does not occur among the snippet's pairs is found.
inline const std::vector<NamePair>& enic_fallback_pairs() {
  static const std::vector<NamePair> kPairs = {
      {"", "Object", "java.lang.Object", NameKind::DeclType, 1},
      {"", "String", "java.lang.String", NameKind::DeclType, 1},
      {"", "Integer", "java.lang.Integer", NameKind::DeclType, 1},
  };
  return kPairs;
}

namespace detail {

inline std::int64_t usage_of(const CorpusStats& stats, const std::string& fqn) {
  const FqnStats* s = stats.find(fqn);
  return s ? s->usage_count : 0;
}

inline void order_examples(std::vector<NamePair>& examples, ExampleOrder order,
                           const CorpusStats& stats, SplitMix64& rng) {
  switch (order) {
    case ExampleOrder::Random:
      deterministic_shuffle(examples, rng);
      return;
    case ExampleOrder::FrequentFirst:
      std::stable_sort(examples.begin(), examples.end(), [&](const NamePair& a, const NamePair& b) {
        const auto ua = usage_of(stats, a.fqn), ub = usage_of(stats, b.fqn);
        if (ua != ub) return ua > ub;
        return a.fqn < b.fqn;
      });
      return;
    case ExampleOrder::InfrequentFirst:
      std::stable_sort(examples.begin(), examples.end(), [&](const NamePair& a, const NamePair& b) {
        const auto ua = usage_of(stats, a.fqn), ub = usage_of(stats, b.fqn);
        if (ua != ub) return ua < ub;
        return a.fqn < b.fqn;
      });
      return;
  }
}

// One stream per (seed, snippet, target, shot kind): reruns reproduce the
// same k, the same subsets and the same shuffles, while configs that differ
// only in rendering share them.
inline SplitMix64 task_rng(std::uint64_t seed, const std::string& snippet_id,
                           const std::string& target_name, ShotKind shot) {
  SplitMix64 mixer(seed ^ fnv1a64(snippet_id));
  SplitMix64 mixer2(mixer.next() ^ fnv1a64(target_name) ^
                    (static_cast<std::uint64_t>(shot) << 56));
  return SplitMix64(mixer2.next());
}

}  // namespace detail

/// Picks and orders the example pairs for one task input. The target pair is
/// never selected. Throws ShotInfeasibleError when the snippet has too few
/// pairs for the requested setting.
inline std::vector<NamePair> select_examples(const std::vector<NamePair>& pairs,
                                             const NamePair& target, ShotSetting shot,
                                             const PromptConfig& config,
                                             const CorpusStats& stats, std::uint64_t seed) {
  const int n = static_cast<int>(pairs.size());
  SplitMix64 rng = detail::task_rng(seed, target.snippet_id, target.simple_name, shot.kind);
  auto infeasible = [&]() -> ShotInfeasibleError {
    return ShotInfeasibleError(target.snippet_id, shot_name(shot.kind));
  };

  std::vector<NamePair> rest;
  rest.reserve(pairs.size());
  for (const NamePair& p : pairs) {
    if (p.simple_name != target.simple_name) rest.push_back(p);
  }

  std::vector<NamePair> selected;
  switch (shot.kind) {
    case ShotKind::Zero:
      return {};
    case ShotKind::OneEnic: {
      std::unordered_set<std::string> bases;
      for (const NamePair& p : pairs) bases.insert(base_name(p.simple_name));
      for (const NamePair& candidate : enic_fallback_pairs()) {
        if (!bases.count(candidate.simple_name)) {
          selected.push_back(candidate);
          break;
        }
      }
      if (selected.empty()) throw infeasible();
      break;
    }
    case ShotKind::One: {
      if (n < 2 || rest.empty()) throw infeasible();
      if (config.one_shot_selection == OneShotSelection::Random) {
        selected.push_back(rest[rng.below(rest.size())]);
      } else {
        const NamePair* most = &rest.front();
        for (const NamePair& p : rest) {
          const auto up = detail::usage_of(stats, p.fqn);
          const auto um = detail::usage_of(stats, most->fqn);
          if (up > um || (up == um && p.fqn < most->fqn)) most = &p;
        }
        selected.push_back(*most);
      }
      break;
    }
    case ShotKind::FewRep: {
      if (n < 2 || rest.empty()) throw infeasible();
      int k;
      if (shot.k) {
        k = *shot.k;
        if (k < 1 || k > static_cast<int>(rest.size())) throw infeasible();
      } else {
        // k drawn once, uniformly from [2, n-2].
        if (n < 4) throw infeasible();
        k = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 3)));
      }
      std::vector<std::size_t> order(rest.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (int picked = 0; picked < k; ++picked) {
        const std::size_t j =
            picked + static_cast<std::size_t>(rng.below(order.size() - picked));
        std::swap(order[picked], order[j]);
        selected.push_back(rest[order[picked]]);
      }
      break;
    }
    case ShotKind::FewLoo: {
      if (n < 2 || rest.empty()) throw infeasible();
      selected = rest;
      break;
    }
  }
  detail::order_examples(selected, config.example_order, stats, rng);
  return selected;
}

/// One fully rendered model input.
struct TaskInput {
  std::string snippet_id;
  NamePair target;
  ShotSetting shot;
  PromptConfig config;
  std::vector<NamePair> examples;
  std::string rendered_text;
  std::string file_name;
};

/// Filesystem-safe slug for a form-tagged name: suffixes map to -g/-a/-c.
inline std::string target_slug(std::string_view simple_name) {
  const SplitName split = split_form(simple_name);
  std::string slug;
  for (char c : split.base) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_';
    slug += ok ? c : '-';
  }
  switch (split.form) {
    case NameForm::Generic: slug += "-g"; break;
    case NameForm::Array: slug += "-a"; break;
    case NameForm::Call: slug += "-c"; break;
    case NameForm::Plain: break;
  }
  return slug;
}

/// Renders one task input. Layout: code context (verbatim, newline added only
/// when missing), optional blank line, optional `// <task description>`,
/// example lines, then the to-be-complete line with no trailing newline.
inline TaskInput compose(const CodeSnippet& snippet, const std::vector<NamePair>& pairs,
                         const NamePair& target, ShotSetting shot, const PromptConfig& config,
                         const CorpusStats& stats) {
  const bool found = std::any_of(pairs.begin(), pairs.end(), [&](const NamePair& p) {
    return p.simple_name == target.simple_name;
  });
  if (!found) {
    throw ComposeError("target " + target.simple_name + " is not a pair of snippet " +
                       snippet.id);
  }

  TaskInput task;
  task.snippet_id = snippet.id;
  task.target = target;
  task.shot = shot;
  task.config = config;
  task.examples = select_examples(pairs, target, shot, config, stats, config.seed);

  std::string text;
  if (config.code_context) {
    text += snippet.source_text;
    if (text.empty() || text.back() != '\n') text += '\n';
    if (config.blank_line_after_context) text += '\n';
  }
  if (config.task_description == TaskDescription::Concise) {
    text += "// " + std::string(kConciseDescription) + "\n";
  } else if (config.task_description == TaskDescription::Verbose) {
    text += "// " + std::string(kVerboseDescription) + "\n";
  }
  for (const NamePair& example : task.examples) {
    text += render_example(example, config) + "\n";
  }
  text += render_query(target.simple_name, config);
  task.rendered_text = std::move(text);
  task.file_name = snippet.id + "__" + target_slug(target.simple_name) + ".java";
  return task;
}

/// One manifest line describing a composed task-input file.
struct TaskRecord {
  std::string file;  ///< path relative to the output root
  std::string snippet_id;
  std::string target;
  std::string gold_fqn;
  ShotSetting shot;
  std::string config_id;
  std::uint64_t seed = 0;
};

struct ComposeWarning {
  std::string snippet_id;
  ShotSetting shot;
  std::string config_id;
  std::string message;
};

struct Manifest {
  std::vector<TaskRecord> records;
  std::vector<ComposeWarning> warnings;
};

inline void write_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ComposeError("cannot write manifest: " + path.string());
  for (const TaskRecord& r : manifest.records) {
    nlohmann::ordered_json obj;
    obj["file"] = r.file;
    obj["snippet_id"] = r.snippet_id;
    obj["target"] = r.target;
    obj["gold_fqn"] = r.gold_fqn;
    obj["shot"] = std::string(shot_name(r.shot.kind));
    obj["config_id"] = r.config_id;
    obj["seed"] = r.seed;
    out << obj.dump() << '\n';
  }
  for (const ComposeWarning& w : manifest.warnings) {
    nlohmann::ordered_json obj;
    obj["warning"] = w.message;
    obj["snippet_id"] = w.snippet_id;
    obj["shot"] = std::string(shot_name(w.shot.kind));
    obj["config_id"] = w.config_id;
    out << obj.dump() << '\n';
  }
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ComposeError("cannot open manifest: " + path.string());
  Manifest manifest;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      if (obj.contains("warning")) {
        ComposeWarning w;
        w.message = obj.at("warning").get<std::string>();
        w.snippet_id = obj.value("snippet_id", "");
        if (auto kind = shot_from_name(obj.value("shot", "zero"))) w.shot.kind = *kind;
        w.config_id = obj.value("config_id", "");
        manifest.warnings.push_back(std::move(w));
        continue;
      }
      TaskRecord r;
      r.file = obj.at("file").get<std::string>();
      r.snippet_id = obj.at("snippet_id").get<std::string>();
      r.target = obj.at("target").get<std::string>();
      r.gold_fqn = obj.at("gold_fqn").get<std::string>();
      const auto kind = shot_from_name(obj.at("shot").get<std::string>());
      if (!kind) throw ComposeError("unknown shot name");
      r.shot.kind = *kind;
      r.config_id = obj.at("config_id").get<std::string>();
      r.seed = obj.value("seed", std::uint64_t{0});
      manifest.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ComposeError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return manifest;
}

/// Renders one file per (config, snippet, target, shot) under
/// `<out_dir>/<config-id>/<shot>/<snippet>__<target>.java` and writes the
/// manifest last. Infeasible shots become manifest warnings, not errors.
inline Manifest compose_batch(const Corpus& corpus,
                              const std::vector<PromptConfig>& configs,
                              const std::vector<ShotSetting>& shots,
                              const std::filesystem::path& out_dir) {
  const CorpusStats stats = compute_stats(corpus);
  Manifest manifest;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ComposeError("cannot create output directory: " + out_dir.string());

  for (const PromptConfig& config : configs) {
    const std::string cid = config_id(config);
    for (const ShotSetting& shot : shots) {
      const std::filesystem::path shot_dir =
          out_dir / cid / std::string(shot_name(shot.kind));
      std::filesystem::create_directories(shot_dir, ec);
      if (ec) throw ComposeError("cannot create output directory: " + shot_dir.string());
      for (const CodeSnippet& snippet : corpus.snippets) {
        std::vector<NamePair> pairs;
        for (const NamePair* p : corpus.snippet_pairs(snippet.id)) pairs.push_back(*p);
        for (const NamePair& target : pairs) {
          TaskInput task;
          try {
            task = compose(snippet, pairs, target, shot, config, stats);
          } catch (const ShotInfeasibleError& e) {
            manifest.warnings.push_back(
                {snippet.id, shot, cid, e.what()});
            continue;
          }
          const std::filesystem::path file_path = shot_dir / task.file_name;
          std::ofstream out(file_path, std::ios::binary);
          if (!out) throw ComposeError("cannot write task input: " + file_path.string());
          out << task.rendered_text;
          out.close();
          TaskRecord record;
          record.file = cid + "/" + std::string(shot_name(shot.kind)) + "/" + task.file_name;
          record.snippet_id = snippet.id;
          record.target = target.simple_name;
          record.gold_fqn = target.fqn;
          record.shot = shot;
          record.config_id = cid;
          record.seed = config.seed;
          manifest.records.push_back(std::move(record));
        }
      }
    }
  }
  write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

}  // namespace fqnprobe
