#pragma once

// Dataset model: code snippets with their simple-name/FQN bindings, loading
// and validation of line-delimited corpus files, corpus-wide FQN statistics
// and the property buckets used for stratified reporting.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fqnprobe/names.hpp"

namespace fqnprobe {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One partial-code unit (method body or forum snippet).
struct CodeSnippet {
  std::string id;
  std::string library;
  std::string package_path;
  std::string source_text;
  int loc = 0;  ///< non-blank source lines, revalidated on load
};

/// One form-tagged simple name bound to its ground-truth FQN.
struct NamePair {
  std::string snippet_id;
  std::string simple_name;
  std::string fqn;
  NameKind kind = NameKind::DeclType;
  int occurrence_count = 1;
};

inline int count_nonblank_lines(std::string_view text) {
  int count = 0;
  bool blank = true;
  for (char c : text) {
    if (c == '\n') {
      if (!blank) ++count;
      blank = true;
    } else if (c != ' ' && c != '\t' && c != '\r') {
      blank = false;
    }
  }
  if (!blank) ++count;
  return count;
}

inline bool contains_whitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n\f\v") != std::string_view::npos;
}

/// Number of dot-separated segments of an FQN.
inline int fqn_length_tokens(std::string_view fqn) {
  if (fqn.empty()) return 0;
  int count = 1;
  for (char c : fqn) {
    if (c == '.') ++count;
  }
  return count;
}

inline std::vector<std::string> split_fqn(std::string_view fqn) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = fqn.find('.', start);
    if (dot == std::string_view::npos) {
      parts.emplace_back(fqn.substr(start));
      return parts;
    }
    parts.emplace_back(fqn.substr(start, dot - start));
    start = dot + 1;
  }
}

inline bool is_valid_fqn(std::string_view fqn) {
  if (contains_whitespace(fqn) || fqn.empty()) return false;
  const auto parts = split_fqn(fqn);
  if (parts.size() < 2) return false;
  return std::all_of(parts.begin(), parts.end(), [](const std::string& p) { return !p.empty(); });
}

/// An indexed, validated corpus. Immutable after construction; safe to share
/// across concurrent readers.
struct Corpus {
  std::vector<CodeSnippet> snippets;
  std::vector<NamePair> pairs;
  std::unordered_map<std::string, std::size_t> snippet_index;
  std::unordered_map<std::string, std::vector<std::size_t>> pairs_by_snippet;

  const CodeSnippet* find_snippet(const std::string& id) const {
    auto it = snippet_index.find(id);
    return it == snippet_index.end() ? nullptr : &snippets[it->second];
  }

  std::vector<const NamePair*> snippet_pairs(const std::string& id) const {
    std::vector<const NamePair*> out;
    auto it = pairs_by_snippet.find(id);
    if (it == pairs_by_snippet.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t idx : it->second) out.push_back(&pairs[idx]);
    return out;
  }

  /// Validates all type invariants and builds the indexes.
  static Corpus build(std::vector<CodeSnippet> snippets, std::vector<NamePair> pairs) {
    Corpus corpus;
    corpus.snippets = std::move(snippets);
    corpus.pairs = std::move(pairs);
    for (std::size_t i = 0; i < corpus.snippets.size(); ++i) {
      const CodeSnippet& s = corpus.snippets[i];
      if (s.id.empty()) throw CorpusError("snippet with empty id");
      if (!corpus.snippet_index.emplace(s.id, i).second) {
        throw CorpusError("duplicate snippet id: " + s.id);
      }
      if (s.source_text.empty()) throw CorpusError("snippet " + s.id + ": empty source text");
      const int recount = count_nonblank_lines(s.source_text);
      if (s.loc != recount) {
        throw CorpusError("snippet " + s.id + ": loc " + std::to_string(s.loc) +
                          " does not match non-blank line count " + std::to_string(recount));
      }
    }
    std::unordered_map<std::string, std::unordered_set<std::string>> seen_names;
    for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
      const NamePair& p = corpus.pairs[i];
      if (!corpus.snippet_index.count(p.snippet_id)) {
        throw CorpusError("pair references unknown snippet id: " + p.snippet_id);
      }
      if (!is_valid_simple_name(p.simple_name)) {
        throw CorpusError("snippet " + p.snippet_id + ": invalid simple name: " + p.simple_name);
      }
      if (!is_valid_fqn(p.fqn)) {
        throw CorpusError("snippet " + p.snippet_id + ": invalid fqn: " + p.fqn);
      }
      if (p.occurrence_count < 1) {
        throw CorpusError("snippet " + p.snippet_id + ": non-positive occurrence count for " +
                          p.simple_name);
      }
      if (!seen_names[p.snippet_id].insert(p.simple_name).second) {
        throw CorpusError("snippet " + p.snippet_id +
                          ": shadowed simple name: " + p.simple_name);
      }
      corpus.pairs_by_snippet[p.snippet_id].push_back(i);
    }
    return corpus;
  }
};

namespace detail {

inline nlohmann::json require_field(const nlohmann::json& obj, const char* key) {
  if (!obj.contains(key)) {
    throw CorpusError(std::string("missing field: ") + key);
  }
  return obj.at(key);
}

}  // namespace detail

/// Loads a corpus file: UTF-8, one JSON snippet record per line with fields
/// id, library, package, loc, code, pairs[{name, fqn, kind, count}].
inline Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file: " + path.string());
  std::vector<CodeSnippet> snippets;
  std::vector<NamePair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
      CodeSnippet snippet;
      snippet.id = detail::require_field(obj, "id").get<std::string>();
      snippet.library = detail::require_field(obj, "library").get<std::string>();
      snippet.package_path = detail::require_field(obj, "package").get<std::string>();
      snippet.loc = detail::require_field(obj, "loc").get<int>();
      snippet.source_text = detail::require_field(obj, "code").get<std::string>();
      for (const auto& pj : detail::require_field(obj, "pairs")) {
        NamePair pair;
        pair.snippet_id = snippet.id;
        pair.simple_name = detail::require_field(pj, "name").get<std::string>();
        pair.fqn = detail::require_field(pj, "fqn").get<std::string>();
        const std::string kind = detail::require_field(pj, "kind").get<std::string>();
        auto parsed = name_kind_from_wire(kind);
        if (!parsed) throw CorpusError("unknown kind: " + kind);
        pair.kind = *parsed;
        pair.occurrence_count = detail::require_field(pj, "count").get<int>();
        pairs.push_back(std::move(pair));
      }
      snippets.push_back(std::move(snippet));
    } catch (const nlohmann::json::exception& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const CorpusError& e) {
      throw CorpusError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return Corpus::build(std::move(snippets), std::move(pairs));
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus file: " + path.string());
  for (const CodeSnippet& s : corpus.snippets) {
    nlohmann::ordered_json obj;
    obj["id"] = s.id;
    obj["library"] = s.library;
    obj["package"] = s.package_path;
    obj["loc"] = s.loc;
    obj["code"] = s.source_text;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const NamePair* p : corpus.snippet_pairs(s.id)) {
      arr.push_back({{"name", p->simple_name},
                     {"fqn", p->fqn},
                     {"kind", std::string(to_wire(p->kind))},
                     {"count", p->occurrence_count}});
    }
    obj["pairs"] = std::move(arr);
    out << obj.dump() << '\n';
  }
}

/// Corpus-wide properties of one FQN.
struct FqnStats {
  std::string fqn;
  int length_tokens = 2;       ///< dot-separated segments
  std::int64_t usage_count = 1;  ///< summed occurrence counts over the corpus
  int sn_fqn = 1;              ///< distinct FQNs sharing this FQN's base simple name
  int fqn_sn = 1;              ///< distinct receiver names mapped to this FQN
};

enum class LengthBucket { L2_4 = 0, L5_7, L8_10, L11Plus };
enum class UsageBucket { U1_10 = 0, U10_1k, U1k_10k, U10kPlus };
enum class CardinalityBucket { C1 = 0, C2, C3, C4Plus };

inline constexpr int kBucketCount = 4;

inline std::string_view label(LengthBucket b) {
  switch (b) {
    case LengthBucket::L2_4: return "2-4";
    case LengthBucket::L5_7: return "5-7";
    case LengthBucket::L8_10: return "8-10";
    case LengthBucket::L11Plus: return ">=11";
  }
  return "";
}

inline std::string_view label(UsageBucket b) {
  switch (b) {
    case UsageBucket::U1_10: return "[1,10)";
    case UsageBucket::U10_1k: return "[10,1k)";
    case UsageBucket::U1k_10k: return "[1k,10k)";
    case UsageBucket::U10kPlus: return ">=10k";
  }
  return "";
}

inline std::string_view label(CardinalityBucket b) {
  switch (b) {
    case CardinalityBucket::C1: return "1:1";
    case CardinalityBucket::C2: return "1:2";
    case CardinalityBucket::C3: return "1:3";
    case CardinalityBucket::C4Plus: return "1:>=4";
  }
  return "";
}

inline LengthBucket length_bucket(int length_tokens) {
  if (length_tokens <= 4) return LengthBucket::L2_4;
  if (length_tokens <= 7) return LengthBucket::L5_7;
  if (length_tokens <= 10) return LengthBucket::L8_10;
  return LengthBucket::L11Plus;
}

// Lower-inclusive, upper-exclusive except the top bucket.
inline UsageBucket usage_bucket(std::int64_t usage_count) {
  if (usage_count < 10) return UsageBucket::U1_10;
  if (usage_count < 1000) return UsageBucket::U10_1k;
  if (usage_count < 10000) return UsageBucket::U1k_10k;
  return UsageBucket::U10kPlus;
}

inline CardinalityBucket cardinality_bucket(int cardinality) {
  if (cardinality <= 1) return CardinalityBucket::C1;
  if (cardinality == 2) return CardinalityBucket::C2;
  if (cardinality == 3) return CardinalityBucket::C3;
  return CardinalityBucket::C4Plus;
}

struct PropertyBuckets {
  LengthBucket length_bucket = LengthBucket::L2_4;
  UsageBucket usage_bucket = UsageBucket::U1_10;
  CardinalityBucket sn_fqn_bucket = CardinalityBucket::C1;
  CardinalityBucket fqn_sn_bucket = CardinalityBucket::C1;
};

inline PropertyBuckets bucketize(const FqnStats& stats) {
  PropertyBuckets b;
  b.length_bucket = length_bucket(stats.length_tokens);
  b.usage_bucket = usage_bucket(stats.usage_count);
  b.sn_fqn_bucket = cardinality_bucket(stats.sn_fqn);
  b.fqn_sn_bucket = cardinality_bucket(stats.fqn_sn);
  return b;
}

/// Aggregated statistics, a pure function of the corpus.
struct CorpusStats {
  std::map<std::string, FqnStats> by_fqn;
  /// SN:FQN cardinality keyed by base simple name (form suffix stripped).
  std::unordered_map<std::string, int> fqns_per_base;
  std::unordered_map<std::string, std::string> snippet_library;

  const FqnStats* find(const std::string& fqn) const {
    auto it = by_fqn.find(fqn);
    return it == by_fqn.end() ? nullptr : &it->second;
  }

  int sn_fqn_of_base(const std::string& base) const {
    auto it = fqns_per_base.find(base);
    return it == fqns_per_base.end() ? 0 : it->second;
  }
};

inline CorpusStats compute_stats(const Corpus& corpus) {
  CorpusStats stats;
  std::unordered_map<std::string, std::set<std::string>> fqns_by_base;
  std::unordered_map<std::string, std::set<std::string>> receiver_bases_by_fqn;
  std::unordered_map<std::string, std::int64_t> usage;
  std::unordered_map<std::string, std::set<std::string>> bases_by_fqn;

  for (const NamePair& p : corpus.pairs) {
    const std::string base = base_name(p.simple_name);
    usage[p.fqn] += p.occurrence_count;
    fqns_by_base[base].insert(p.fqn);
    bases_by_fqn[p.fqn].insert(base);
    if (p.kind == NameKind::Receiver) receiver_bases_by_fqn[p.fqn].insert(base);
  }
  for (const auto& [base, fqns] : fqns_by_base) {
    stats.fqns_per_base[base] = static_cast<int>(fqns.size());
  }
  for (const auto& [fqn, count] : usage) {
    FqnStats s;
    s.fqn = fqn;
    s.length_tokens = fqn_length_tokens(fqn);
    s.usage_count = count;
    int sn_fqn = 1;
    for (const std::string& base : bases_by_fqn[fqn]) {
      sn_fqn = std::max(sn_fqn, stats.fqns_per_base[base]);
    }
    s.sn_fqn = sn_fqn;
    auto recv = receiver_bases_by_fqn.find(fqn);
    s.fqn_sn = recv == receiver_bases_by_fqn.end()
                   ? 1
                   : std::max<int>(1, static_cast<int>(recv->second.size()));
    stats.by_fqn.emplace(fqn, std::move(s));
  }
  for (const CodeSnippet& s : corpus.snippets) {
    stats.snippet_library[s.id] = s.library;
  }
  return stats;
}

}  // namespace fqnprobe
