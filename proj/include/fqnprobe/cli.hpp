#pragma once

// Command-line entry point wiring the scan → compose → run → eval pipeline.
// Exit codes: 0 success, 1 evaluation-level failure (e.g. infeasible shots
// skipped with warnings), 2 configuration or I/O error.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fqnprobe/backend.hpp"
#include "fqnprobe/composer.hpp"
#include "fqnprobe/corpus.hpp"
#include "fqnprobe/evaluator.hpp"
#include "fqnprobe/http_backend.hpp"
#include "fqnprobe/runner.hpp"
#include "fqnprobe/sampler.hpp"
#include "fqnprobe/scanner.hpp"

namespace fqnprobe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvalFailure = 1;
inline constexpr int kExitConfigError = 2;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Declarative run configuration; all paths are relative to the config
/// file's directory.
struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path out_dir;
  std::vector<std::string> presets;  ///< "basic" | "best" | "ablation"
  /// Labeled factor overrides on top of the basic preset.
  std::vector<std::pair<std::string, nlohmann::json>> inline_configs;
  std::vector<std::string> shots = {"all"};
  std::string backend = "oracle";  ///< oracle | stochastic | http
  std::optional<std::filesystem::path> recall_params_path;
  HttpBackendConfig http;
  int concurrency = 1;
  std::uint64_t seed = 0;
};

namespace cli_detail {

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : base / p;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json obj;
  try {
    in >> obj;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file " + path.string() + ": " + e.what());
  }
  const std::filesystem::path base = path.parent_path();
  RunConfig config;
  if (obj.contains("corpus")) config.corpus_path = resolve(base, obj["corpus"].get<std::string>());
  if (obj.contains("out_dir")) config.out_dir = resolve(base, obj["out_dir"].get<std::string>());
  if (obj.contains("presets")) config.presets = obj["presets"].get<std::vector<std::string>>();
  if (obj.contains("configs")) {
    for (const auto& entry : obj["configs"]) {
      config.inline_configs.emplace_back(entry.value("label", "custom"), entry);
    }
  }
  if (obj.contains("shots")) config.shots = obj["shots"].get<std::vector<std::string>>();
  if (obj.contains("backend")) {
    const auto& backend = obj["backend"];
    config.backend = backend.value("type", "oracle");
    if (backend.contains("recall_params")) {
      config.recall_params_path = resolve(base, backend["recall_params"].get<std::string>());
    }
    config.http.base_url = backend.value("base_url", "");
    config.http.path = backend.value("path", config.http.path);
    config.http.timeout_ms = backend.value("timeout_ms", config.http.timeout_ms);
    config.http.retries = backend.value("retries", config.http.retries);
    config.http.auth_header = backend.value("auth_header", "");
    config.http.auth_scheme = backend.value("auth_scheme", config.http.auth_scheme);
  }
  config.concurrency = obj.value("concurrency", 1);
  config.seed = obj.value("seed", std::uint64_t{0});
  return config;
}

/// Builds a configuration from the basic preset plus JSON factor overrides.
inline PromptConfig parse_prompt_config(const nlohmann::json& obj, std::uint64_t seed) {
  PromptConfig config = basic_config(seed);
  if (obj.contains("code_context")) config.code_context = obj["code_context"].get<bool>();
  if (obj.contains("task_description")) {
    const std::string value = obj["task_description"].get<std::string>();
    if (value == "none") {
      config.task_description = TaskDescription::None;
    } else if (value == "concise") {
      config.task_description = TaskDescription::Concise;
    } else if (value == "verbose") {
      config.task_description = TaskDescription::Verbose;
    } else {
      throw ConfigError("unknown task_description: " + value);
    }
  }
  if (obj.contains("template")) {
    const std::string value = obj["template"].get<std::string>();
    if (value == "description") {
      config.prompt_template = PromptTemplate::Description;
    } else if (value == "symbol") {
      config.prompt_template = PromptTemplate::Symbol;
    } else {
      throw ConfigError("unknown template: " + value);
    }
  }
  if (obj.contains("example_order")) {
    const std::string value = obj["example_order"].get<std::string>();
    if (value == "random") {
      config.example_order = ExampleOrder::Random;
    } else if (value == "frequent-first") {
      config.example_order = ExampleOrder::FrequentFirst;
    } else if (value == "infrequent-first") {
      config.example_order = ExampleOrder::InfrequentFirst;
    } else {
      throw ConfigError("unknown example_order: " + value);
    }
  }
  if (obj.contains("identifier_quotes")) {
    config.identifier_quotes = obj["identifier_quotes"].get<bool>();
  }
  if (obj.contains("blank_line_after_context")) {
    config.blank_line_after_context = obj["blank_line_after_context"].get<bool>();
  }
  if (obj.contains("one_shot_selection")) {
    const std::string value = obj["one_shot_selection"].get<std::string>();
    if (value == "random") {
      config.one_shot_selection = OneShotSelection::Random;
    } else if (value == "most-used") {
      config.one_shot_selection = OneShotSelection::MostUsed;
    } else {
      throw ConfigError("unknown one_shot_selection: " + value);
    }
  }
  return config;
}

inline std::vector<ShotSetting> parse_shots(const std::vector<std::string>& names) {
  std::vector<ShotSetting> shots;
  for (const std::string& name : names) {
    if (name == "all") {
      for (ShotKind kind : kAllShots) shots.push_back({kind, std::nullopt});
      continue;
    }
    const auto kind = shot_from_name(name);
    if (!kind) throw ConfigError("unknown shot name: " + name);
    shots.push_back({*kind, std::nullopt});
  }
  if (shots.empty()) throw ConfigError("no shot settings selected");
  return shots;
}

inline std::vector<std::pair<std::string, PromptConfig>> parse_presets(
    const std::vector<std::string>& names, std::uint64_t seed) {
  std::vector<std::pair<std::string, PromptConfig>> configs;
  for (const std::string& name : names) {
    if (name == "basic") {
      configs.emplace_back("basic", basic_config(seed));
    } else if (name == "best") {
      configs.emplace_back("best", best_config(seed));
    } else if (name == "ablation") {
      for (auto& named : ablation_configs(seed)) configs.push_back(std::move(named));
    } else {
      throw ConfigError("unknown preset: " + name);
    }
  }
  if (configs.empty()) configs.emplace_back("basic", basic_config(seed));
  // Drop duplicate config ids (ablation already contains basic and best).
  std::vector<std::pair<std::string, PromptConfig>> unique;
  for (auto& named : configs) {
    const std::string id = config_id(named.second);
    const bool seen = std::any_of(unique.begin(), unique.end(), [&](const auto& other) {
      return config_id(other.second) == id;
    });
    if (!seen) unique.push_back(std::move(named));
  }
  return unique;
}

inline void require_writable(const std::filesystem::path& path, bool force) {
  if (std::filesystem::exists(path) && !force) {
    throw ConfigError("refusing to overwrite " + path.string() + " (use --force)");
  }
}

inline std::unique_ptr<CompletionBackend> make_backend(const RunConfig& config,
                                                       const Corpus* corpus,
                                                       const Manifest& manifest) {
  if (config.backend == "oracle") {
    if (corpus) return std::make_unique<OracleBackend>(*corpus);
    return std::make_unique<OracleBackend>(GoldTable(manifest));
  }
  if (config.backend == "stochastic") {
    RecallParams params = config.recall_params_path
                              ? load_recall_params(*config.recall_params_path)
                              : default_recall_params();
    if (config.seed != 0) params.seed = config.seed;
    if (!corpus) throw ConfigError("stochastic backend requires --corpus");
    return std::make_unique<StochasticBackend>(GoldTable(manifest), compute_stats(*corpus),
                                               params);
  }
  if (config.backend == "http") {
    return std::make_unique<HttpBackend>(config.http);
  }
  throw ConfigError("unknown backend: " + config.backend);
}

inline std::map<std::string, std::string> load_config_labels(
    const std::filesystem::path& out_dir) {
  std::map<std::string, std::string> labels;
  const auto path = out_dir / "configs.json";
  std::ifstream in(path);
  if (!in) return labels;
  try {
    nlohmann::json obj;
    in >> obj;
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      labels[it.key()] = it.value().value("label", it.key());
    }
  } catch (const nlohmann::json::exception&) {
    // Sidecar is advisory; ignore malformed content.
  }
  return labels;
}

}  // namespace cli_detail

inline int cmd_scan(const std::filesystem::path& corpus_path,
                    const std::filesystem::path& out_path, bool force) {
  cli_detail::require_writable(out_path, force);
  const Corpus corpus = load_corpus(corpus_path);
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write hits file: " + out_path.string());
  for (const CodeSnippet& snippet : corpus.snippets) {
    nlohmann::ordered_json obj;
    obj["id"] = snippet.id;
    nlohmann::ordered_json hits = nlohmann::ordered_json::array();
    for (const ScanHit& hit : extract_simple_names(snippet.source_text)) {
      hits.push_back({{"name", hit.simple_name},
                      {"kind", std::string(to_wire(hit.kind))},
                      {"line", hit.line},
                      {"count", hit.occurrence_count}});
    }
    obj["hits"] = std::move(hits);
    out << obj.dump() << '\n';
  }
  return kExitOk;
}

inline int cmd_sample(const std::filesystem::path& corpus_path,
                      const std::filesystem::path& out_path,
                      const std::filesystem::path& log_path, const SamplerConfig& config,
                      bool force) {
  cli_detail::require_writable(out_path, force);
  cli_detail::require_writable(log_path, force);
  const Corpus corpus = load_corpus(corpus_path);
  const SampleResult result = sample(corpus, config);
  save_corpus(reduce_corpus(corpus, result.sampled_ids), out_path);
  write_sample_log(result, log_path);
  std::cout << "sampled " << result.sampled_ids.size() << " of " << corpus.snippets.size()
            << " snippets\n";
  return kExitOk;
}

inline int cmd_compose(const RunConfig& config, bool force) {
  if (config.corpus_path.empty() || config.out_dir.empty()) {
    throw ConfigError("compose requires --corpus and --out");
  }
  cli_detail::require_writable(config.out_dir, force);
  if (force) {
    std::error_code ec;
    std::filesystem::remove_all(config.out_dir, ec);
  }
  const Corpus corpus = load_corpus(config.corpus_path);
  auto named_configs = config.presets.empty() && !config.inline_configs.empty()
                           ? std::vector<std::pair<std::string, PromptConfig>>{}
                           : cli_detail::parse_presets(config.presets, config.seed);
  for (const auto& [config_label, overrides] : config.inline_configs) {
    PromptConfig parsed = cli_detail::parse_prompt_config(overrides, config.seed);
    const std::string id = config_id(parsed);
    const bool duplicate =
        std::any_of(named_configs.begin(), named_configs.end(),
                    [&](const auto& other) { return config_id(other.second) == id; });
    if (!duplicate) named_configs.emplace_back(config_label, std::move(parsed));
  }
  if (named_configs.empty()) throw ConfigError("no prompt configurations selected");
  const auto shots = cli_detail::parse_shots(config.shots);

  std::vector<PromptConfig> prompt_configs;
  for (const auto& [name, prompt_config] : named_configs) prompt_configs.push_back(prompt_config);
  const Manifest manifest = compose_batch(corpus, prompt_configs, shots, config.out_dir);

  nlohmann::ordered_json sidecar;
  for (const auto& [name, prompt_config] : named_configs) {
    sidecar[config_id(prompt_config)] = {{"label", name}};
  }
  std::ofstream sidecar_out(config.out_dir / "configs.json");
  sidecar_out << sidecar.dump(2) << '\n';

  std::cout << "composed " << manifest.records.size() << " task inputs";
  if (!manifest.warnings.empty()) {
    std::cout << " (" << manifest.warnings.size() << " infeasible shots skipped)";
  }
  std::cout << '\n';
  return manifest.warnings.empty() ? kExitOk : kExitEvalFailure;
}

inline int cmd_run(const RunConfig& config, const std::filesystem::path& manifest_path,
                   const std::filesystem::path& out_path, bool force) {
  cli_detail::require_writable(out_path, force);
  const Manifest manifest = load_manifest(manifest_path);
  std::optional<Corpus> corpus;
  if (!config.corpus_path.empty()) corpus = load_corpus(config.corpus_path);
  const auto backend =
      cli_detail::make_backend(config, corpus ? &*corpus : nullptr, manifest);
  const auto predictions = run_backend(manifest, manifest_path.parent_path(), *backend,
                                       config.concurrency);
  write_predictions(predictions, out_path);
  std::cout << "ran " << predictions.size() << " task inputs\n";
  return kExitOk;
}

inline int cmd_eval(const std::filesystem::path& predictions_path,
                    const std::filesystem::path& manifest_path,
                    const std::filesystem::path& corpus_path,
                    const std::filesystem::path& out_dir,
                    const std::vector<ReportFormat>& formats, bool force) {
  for (ReportFormat format : formats) {
    cli_detail::require_writable(
        out_dir / (format == ReportFormat::Csv ? "report.csv" : "report.md"), force);
  }
  const Corpus corpus = load_corpus(corpus_path);
  const CorpusStats stats = compute_stats(corpus);
  const Manifest manifest = load_manifest(manifest_path);
  const auto predictions = load_predictions(predictions_path);
  const auto records = join_predictions(manifest, predictions);
  StratifiedReport report = evaluate(records, stats);
  report.config_labels = cli_detail::load_config_labels(manifest_path.parent_path());
  for (const auto& [id, report_label] : report.config_labels) {
    if (report_label == "basic") report.baseline_config_id = id;
  }
  emit_report(report, formats, out_dir);
  std::cout << "evaluated " << records.size() << " predictions\n";
  return kExitOk;
}

inline int cmd_report(const std::filesystem::path& csv_path,
                      const std::filesystem::path& out_path, bool force) {
  cli_detail::require_writable(out_path, force);
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open report CSV: " + csv_path.string());
  const StratifiedReport report = parse_report_csv(in);
  std::ofstream out(out_path);
  if (!out) throw ConfigError("cannot write report: " + out_path.string());
  out << report_to_markdown(report);
  return kExitOk;
}

/// Parses arguments (without the program name) and dispatches. Never throws.
inline int run_cli(std::vector<std::string> args) {
  CLI::App app{"fqnprobe: probes FQN knowledge in completion-style code models"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool force = false;
  app.add_option("--config", config_path, "JSON run configuration file");
  app.add_option("--seed", seed, "seed propagated to all modules")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_flag("--force", force, "overwrite existing outputs");

  std::string corpus_path, out_path, log_path, manifest_path, predictions_path, csv_path;
  std::string backend = "oracle";
  std::string recall_params_path;
  std::vector<std::string> presets;
  std::vector<std::string> shots;
  std::string formats_text = "csv,md";
  int concurrency = 0;
  SamplerConfig sampler_config;
  HttpBackendConfig http;

  auto* scan = app.add_subcommand("scan", "extract simple names from every snippet");
  scan->add_option("--corpus", corpus_path)->required();
  scan->add_option("--out", out_path)->required();

  auto* sample_cmd = app.add_subcommand("sample", "diversity-sample a corpus");
  sample_cmd->add_option("--corpus", corpus_path)->required();
  sample_cmd->add_option("--out", out_path)->required();
  sample_cmd->add_option("--log", log_path)->required();
  sample_cmd->add_option("--threshold", sampler_config.similarity_threshold);
  sample_cmd->add_option("--max-loc", sampler_config.max_loc);
  sample_cmd->add_option("--min-pairs", sampler_config.min_pairs);

  auto* compose_cmd = app.add_subcommand("compose", "render task inputs and a manifest");
  compose_cmd->add_option("--corpus", corpus_path);
  compose_cmd->add_option("--out", out_path);
  compose_cmd->add_option("--preset", presets, "basic | best | ablation")->delimiter(',');
  compose_cmd->add_option("--shots", shots, "zero|one-enic|one|few-rep|few-loo|all")->delimiter(',');

  auto* run_cmd = app.add_subcommand("run", "complete every task input with a backend");
  run_cmd->add_option("--manifest", manifest_path)->required();
  run_cmd->add_option("--out", out_path)->required();
  run_cmd->add_option("--backend", backend, "oracle | stochastic | http");
  run_cmd->add_option("--corpus", corpus_path);
  run_cmd->add_option("--recall-params", recall_params_path);
  run_cmd->add_option("--concurrency", concurrency);
  run_cmd->add_option("--base-url", http.base_url);
  run_cmd->add_option("--path", http.path);
  run_cmd->add_option("--timeout-ms", http.timeout_ms);
  run_cmd->add_option("--retries", http.retries);
  run_cmd->add_option("--auth-header", http.auth_header);

  auto* eval_cmd = app.add_subcommand("eval", "score predictions into reports");
  eval_cmd->add_option("--predictions", predictions_path)->required();
  eval_cmd->add_option("--manifest", manifest_path)->required();
  eval_cmd->add_option("--corpus", corpus_path)->required();
  eval_cmd->add_option("--out", out_path)->required();
  eval_cmd->add_option("--format", formats_text, "comma list of csv,md");

  auto* report_cmd = app.add_subcommand("report", "re-render a CSV report as markdown");
  report_cmd->add_option("--csv", csv_path)->required();
  report_cmd->add_option("--out", out_path)->required();

  // Global flags (--seed, --force, --config) are accepted after a subcommand.
  for (CLI::App* sub : {scan, sample_cmd, compose_cmd, run_cmd, eval_cmd, report_cmd}) {
    sub->fallthrough();
  }

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      std::cout << app.help();
      return kExitOk;
    }
    std::cerr << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    RunConfig run_config;
    if (!config_path.empty()) run_config = cli_detail::load_run_config(config_path);
    if (seed_given) run_config.seed = seed;
    if (!corpus_path.empty()) run_config.corpus_path = corpus_path;
    if (!presets.empty()) run_config.presets = presets;
    if (!shots.empty()) run_config.shots = shots;
    if (concurrency > 0) run_config.concurrency = concurrency;
    if (run_cmd->count("--backend") > 0 || run_config.backend.empty()) {
      run_config.backend = backend;
    }
    if (!recall_params_path.empty()) run_config.recall_params_path = recall_params_path;
    // Command-line HTTP settings override the config file field by field.
    if (run_cmd->count("--base-url")) run_config.http.base_url = http.base_url;
    if (run_cmd->count("--path")) run_config.http.path = http.path;
    if (run_cmd->count("--timeout-ms")) run_config.http.timeout_ms = http.timeout_ms;
    if (run_cmd->count("--retries")) run_config.http.retries = http.retries;
    if (run_cmd->count("--auth-header")) run_config.http.auth_header = http.auth_header;
    run_config.http.concurrency = run_config.concurrency;

    if (*scan) return cmd_scan(run_config.corpus_path, out_path, force);
    if (*sample_cmd) {
      sampler_config.seed = run_config.seed;
      return cmd_sample(run_config.corpus_path, out_path, log_path, sampler_config, force);
    }
    if (*compose_cmd) {
      if (!out_path.empty()) run_config.out_dir = out_path;
      return cmd_compose(run_config, force);
    }
    if (*run_cmd) return cmd_run(run_config, manifest_path, out_path, force);
    if (*eval_cmd) {
      std::vector<ReportFormat> formats;
      std::stringstream ss(formats_text);
      std::string token;
      while (std::getline(ss, token, ',')) {
        if (token == "csv") {
          formats.push_back(ReportFormat::Csv);
        } else if (token == "md") {
          formats.push_back(ReportFormat::Markdown);
        } else if (!token.empty()) {
          throw ConfigError("unknown report format: " + token);
        }
      }
      return cmd_eval(predictions_path, manifest_path, run_config.corpus_path, out_path,
                      formats, force);
    }
    if (*report_cmd) return cmd_report(csv_path, out_path, force);
    std::cerr << "no subcommand selected\n";
    return kExitConfigError;
  } catch (const ShotInfeasibleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitEvalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace fqnprobe
