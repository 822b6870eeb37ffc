#pragma once

// Completion backends behind one interface: a deterministic lookup oracle and
// a stochastic simulated code model whose recall follows the corpus's data
// distribution properties. The HTTP client lives in http_backend.hpp.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fqnprobe/composer.hpp"
#include "fqnprobe/corpus.hpp"
#include "fqnprobe/rng.hpp"

namespace fqnprobe {

class BackendError : public std::runtime_error {
 public:
  explicit BackendError(const std::string& message, bool retryable = false)
      : std::runtime_error(message), retryable_(retryable) {}
  bool retryable() const { return retryable_; }

 private:
  bool retryable_;
};

class TransportError : public BackendError {
 public:
  explicit TransportError(const std::string& message) : BackendError(message, true) {}
};

class TimeoutError : public BackendError {
 public:
  explicit TimeoutError(const std::string& message) : BackendError(message, true) {}
};

class AuthError : public BackendError {
 public:
  explicit AuthError(const std::string& message) : BackendError(message, false) {}
};

/// Harness-side context attached to a request. The oracle scopes its lookup
/// by snippet; the stochastic backend derives its per-request stream from the
/// file name and reads the shot setting.
struct RequestMeta {
  std::string snippet_id;
  std::string file_name;
  ShotKind shot = ShotKind::Zero;
};

struct CompletionRequest {
  std::string text;
  int max_new_tokens = 64;
  std::vector<std::string> stop_sequences = {"\n"};
  RequestMeta meta;
};

/// Either raw completion text (never empty) or no completion at all.
struct CompletionResult {
  std::optional<std::string> text;
  std::int64_t latency_ms = 0;

  static CompletionResult no_completion(std::int64_t latency_ms = 0) {
    return {std::nullopt, latency_ms};
  }
  static CompletionResult from_text(std::string raw, std::int64_t latency_ms = 0) {
    if (raw.empty()) return no_completion(latency_ms);
    return {std::move(raw), latency_ms};
  }
  bool has_completion() const { return text.has_value(); }
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  /// Must be safe for concurrent calls and must not mutate state visible to
  /// callers.
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
};

/// The simple name and quoting style recovered from a to-be-complete line.
struct ParsedQuery {
  std::string simple_name;
  bool quoted = false;
};

namespace detail {

inline std::string last_line(std::string_view text) {
  const std::size_t pos = text.find_last_of('\n');
  return std::string(pos == std::string_view::npos ? text : text.substr(pos + 1));
}

inline bool strip_quotes(std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s = s.substr(1, s.size() - 2);
    return true;
  }
  return false;
}

}  // namespace detail

/// Parses either template's query line back into the simple name:
/// `// the fully qualified name of "SN" is` or `// "SN" →`.
inline std::optional<ParsedQuery> parse_query_line(std::string_view line) {
  static constexpr std::string_view kDescPrefix = "// the fully qualified name of ";
  static constexpr std::string_view kDescSuffix = " is";
  static constexpr std::string_view kSymbolPrefix = "// ";
  const std::string arrow_suffix = " " + std::string(kMappingArrow);

  std::string text(line);
  while (!text.empty() && (text.back() == '\r' || text.back() == ' ')) text.pop_back();

  ParsedQuery query;
  if (text.rfind(kDescPrefix, 0) == 0 && text.size() > kDescPrefix.size() + kDescSuffix.size() &&
      text.compare(text.size() - kDescSuffix.size(), kDescSuffix.size(), kDescSuffix) == 0) {
    query.simple_name =
        text.substr(kDescPrefix.size(), text.size() - kDescPrefix.size() - kDescSuffix.size());
  } else if (text.rfind(kSymbolPrefix, 0) == 0 &&
             text.size() > kSymbolPrefix.size() + arrow_suffix.size() &&
             text.compare(text.size() - arrow_suffix.size(), arrow_suffix.size(),
                          arrow_suffix) == 0) {
    query.simple_name = text.substr(
        kSymbolPrefix.size(), text.size() - kSymbolPrefix.size() - arrow_suffix.size());
  } else {
    return std::nullopt;
  }
  if (query.simple_name.empty() || contains_whitespace(query.simple_name)) return std::nullopt;
  query.quoted = detail::strip_quotes(query.simple_name);
  return query;
}

/// Completion text for an FQN answer, mirroring the query's quoting. Starts
/// with the separator space the query line left off.
inline std::string render_completion(std::string_view fqn, bool quoted) {
  if (quoted) return " \"" + std::string(fqn) + "\"";
  return " " + std::string(fqn);
}

/// Ground-truth lookup keyed by (snippet id, form-tagged simple name).
class GoldTable {
 public:
  GoldTable() = default;

  explicit GoldTable(const Corpus& corpus) {
    for (const NamePair& p : corpus.pairs) {
      table_.emplace(key(p.snippet_id, p.simple_name), p.fqn);
    }
  }

  explicit GoldTable(const Manifest& manifest) {
    for (const TaskRecord& r : manifest.records) {
      table_.emplace(key(r.snippet_id, r.target), r.gold_fqn);
    }
  }

  const std::string* lookup(const std::string& snippet_id, const std::string& name) const {
    auto it = table_.find(key(snippet_id, name));
    return it == table_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return table_.size(); }

  /// Distinct dot-separated tokens over all known FQNs, sorted.
  std::vector<std::string> token_vocabulary() const {
    std::set<std::string> tokens;
    for (const auto& [k, fqn] : table_) {
      for (const std::string& part : split_fqn(fqn)) tokens.insert(part);
    }
    return {tokens.begin(), tokens.end()};
  }

  std::vector<std::string> all_fqns() const {
    std::set<std::string> fqns;
    for (const auto& [k, fqn] : table_) fqns.insert(fqn);
    return {fqns.begin(), fqns.end()};
  }

 private:
  static std::string key(const std::string& snippet_id, const std::string& name) {
    return snippet_id + "\x1f" + name;
  }
  std::map<std::string, std::string> table_;
};

/// Deterministic backend that answers from a ground-truth table. On a corpus
/// it was built from, the pipeline scores 100% at every shot setting.
class OracleBackend : public CompletionBackend {
 public:
  explicit OracleBackend(GoldTable table) : table_(std::move(table)) {}
  explicit OracleBackend(const Corpus& corpus) : table_(corpus) {}

  CompletionResult complete(const CompletionRequest& request) override {
    const auto query = parse_query_line(detail::last_line(request.text));
    if (!query) return CompletionResult::no_completion();
    const std::string* fqn = table_.lookup(request.meta.snippet_id, query->simple_name);
    if (!fqn) return CompletionResult::no_completion();
    return CompletionResult::from_text(render_completion(*fqn, query->quoted));
  }

 private:
  GoldTable table_;
};

/// Recall model of the stochastic backend. All parameters are probabilities
/// or multiplicative weights; the resulting recall is clamped to [0, 1].
struct RecallParams {
  /// Base recall per shot setting, indexed by ShotKind.
  std::array<double, kShotCount> base{};
  /// Multiplier per usage bucket, ascending buckets; non-decreasing.
  std::array<double, kBucketCount> usage_gain{};
  /// Multiplier per length bucket, ascending buckets; non-increasing.
  std::array<double, kBucketCount> length_penalty{};
  /// Added when at least one example from the snippet is present.
  double in_context_bonus = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kRecallParamsVersion = "v1";

/// Shipped defaults: tuned so a Zipfian corpus reproduces the qualitative
/// accuracy orderings across shots, usage and length buckets.
inline RecallParams default_recall_params() {
  RecallParams p;
  p.base = {0.97, 0.975, 0.985, 0.995, 1.0};  // zero, one-enic, one, few-rep, few-loo
  p.usage_gain = {0.18, 0.55, 0.85, 1.0};
  p.length_penalty = {1.0, 0.72, 0.5, 0.35};
  p.in_context_bonus = 0.10;
  p.seed = 0;
  return p;
}

inline void validate_recall_params(const RecallParams& p) {
  for (double b : p.base) {
    if (b < 0.0 || b > 1.0) throw BackendError("recall base out of [0,1]");
  }
  for (std::size_t i = 1; i < p.usage_gain.size(); ++i) {
    if (p.usage_gain[i] < p.usage_gain[i - 1]) {
      throw BackendError("usage_gain must be non-decreasing");
    }
  }
  for (std::size_t i = 1; i < p.length_penalty.size(); ++i) {
    if (p.length_penalty[i] > p.length_penalty[i - 1]) {
      throw BackendError("length_penalty must be non-increasing");
    }
  }
}

inline void save_recall_params(const RecallParams& p, const std::filesystem::path& path) {
  nlohmann::ordered_json obj;
  obj["version"] = std::string(kRecallParamsVersion);
  obj["base"] = p.base;
  obj["usage_gain"] = p.usage_gain;
  obj["length_penalty"] = p.length_penalty;
  obj["in_context_bonus"] = p.in_context_bonus;
  obj["seed"] = p.seed;
  std::ofstream out(path);
  if (!out) throw BackendError("cannot write recall params: " + path.string());
  out << obj.dump(2) << '\n';
}

inline RecallParams load_recall_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("cannot open recall params: " + path.string());
  nlohmann::json obj;
  try {
    in >> obj;
    RecallParams p;
    const auto base = obj.at("base").get<std::vector<double>>();
    const auto gain = obj.at("usage_gain").get<std::vector<double>>();
    const auto penalty = obj.at("length_penalty").get<std::vector<double>>();
    if (base.size() != p.base.size() || gain.size() != p.usage_gain.size() ||
        penalty.size() != p.length_penalty.size()) {
      throw BackendError("recall params arrays have wrong length");
    }
    std::copy(base.begin(), base.end(), p.base.begin());
    std::copy(gain.begin(), gain.end(), p.usage_gain.begin());
    std::copy(penalty.begin(), penalty.end(), p.length_penalty.begin());
    p.in_context_bonus = obj.at("in_context_bonus").get<double>();
    p.seed = obj.value("seed", std::uint64_t{0});
    validate_recall_params(p);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError("malformed recall params " + path.string() + ": " + e.what());
  }
}

/// Probability that the simulated model recalls an FQN with the given stats
/// at the given shot setting:
/// clamp(base[shot] * usage_gain * length_penalty + in_context_bonus).
inline double stochastic_recall_probability(const FqnStats& stats, ShotKind shot,
                                            bool in_context, const RecallParams& params) {
  const PropertyBuckets buckets = bucketize(stats);
  double p = params.base[static_cast<int>(shot)] *
             params.usage_gain[static_cast<int>(buckets.usage_bucket)] *
             params.length_penalty[static_cast<int>(buckets.length_bucket)];
  if (in_context) p += params.in_context_bonus;
  return std::clamp(p, 0.0, 1.0);
}

/// True when the shot setting puts at least one example from the snippet into
/// the task input (one-shot and both few-shot settings; the ENIC example is
/// external by construction).
inline bool shot_has_in_context_example(ShotKind shot) {
  return shot == ShotKind::One || shot == ShotKind::FewRep || shot == ShotKind::FewLoo;
}

/// Simulated code model. Recalls the gold FQN with the probability above;
/// otherwise it emits a near-miss corruption or no completion (50/50). The
/// per-request stream depends only on (seed, file name), so results are
/// independent of call order and concurrency.
class StochasticBackend : public CompletionBackend {
 public:
  StochasticBackend(GoldTable table, CorpusStats stats, RecallParams params)
      : table_(std::move(table)), stats_(std::move(stats)), params_(params) {
    validate_recall_params(params_);
    vocabulary_ = table_.token_vocabulary();
  }

  CompletionResult complete(const CompletionRequest& request) override {
    const auto query = parse_query_line(detail::last_line(request.text));
    if (!query) return CompletionResult::no_completion();
    const std::string* gold = table_.lookup(request.meta.snippet_id, query->simple_name);
    if (!gold) return CompletionResult::no_completion();
    const FqnStats* stats = stats_.find(*gold);
    if (!stats) return CompletionResult::no_completion();

    SplitMix64 rng = derive_rng(params_.seed, request.meta.file_name);
    const double p = stochastic_recall_probability(
        *stats, request.meta.shot, shot_has_in_context_example(request.meta.shot), params_);
    if (rng.unit() < p) {
      return CompletionResult::from_text(render_completion(*gold, query->quoted));
    }
    if (rng.unit() < 0.5) return CompletionResult::no_completion();
    return CompletionResult::from_text(render_completion(corrupt(*gold, rng), query->quoted));
  }

 private:
  /// Near-miss corruption: one interior package token swapped for another
  /// token from the corpus vocabulary.
  std::string corrupt(const std::string& fqn, SplitMix64& rng) const {
    std::vector<std::string> parts = split_fqn(fqn);
    if (parts.empty() || vocabulary_.empty()) return fqn + ".x";
    // Interior tokens when there are any; for two-token names the package
    // token is replaced and the terminal name kept.
    const std::size_t index =
        parts.size() >= 3 ? 1 + static_cast<std::size_t>(rng.below(parts.size() - 2)) : 0;
    const std::string original = parts[index];
    std::string replacement = vocabulary_[rng.below(vocabulary_.size())];
    if (replacement == original) {
      replacement = vocabulary_[(fnv1a64(replacement) + 1) % vocabulary_.size()];
    }
    if (replacement == original) replacement = original + "x";
    parts[index] = replacement;
    std::string out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) out += "." + parts[i];
    return out;
  }

  GoldTable table_;
  CorpusStats stats_;
  RecallParams params_;
  std::vector<std::string> vocabulary_;
};

}  // namespace fqnprobe
