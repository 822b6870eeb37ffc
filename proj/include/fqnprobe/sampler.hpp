#pragma once

// Diversity-driven sampling of representative snippets: greedy per-package
// acceptance under a pairwise similarity threshold, implemented over 3-token
// shingle Jaccard similarity. The metric is pluggable so an embedding-based
// similarity can be swapped in.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fqnprobe/corpus.hpp"
#include "fqnprobe/rng.hpp"
#include "fqnprobe/scanner.hpp"

namespace fqnprobe {

struct SamplerConfig {
  double similarity_threshold = 0.9;
  int max_loc = 30;    ///< exclusive upper bound
  int min_pairs = 4;   ///< strictly more than three pairs
  std::uint64_t seed = 0;
};

using SimilarityFn = std::function<double(const CodeSnippet&, const CodeSnippet&)>;

namespace detail {

inline std::set<std::string> token_shingles(const CodeSnippet& snippet) {
  const std::vector<Token> toks = tokenize_lenient(snippet.source_text);
  std::set<std::string> shingles;
  for (std::size_t i = 0; i + 3 <= toks.size(); ++i) {
    shingles.insert(toks[i].text + "\x1f" + toks[i + 1].text + "\x1f" + toks[i + 2].text);
  }
  return shingles;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  std::size_t intersection = 0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  for (const std::string& s : small) {
    if (large.count(s)) ++intersection;
  }
  return static_cast<double>(intersection) /
         static_cast<double>(a.size() + b.size() - intersection);
}

}  // namespace detail

/// Jaccard coefficient over 3-token shingles of the lenient token streams.
/// Symmetric; identical token streams yield 1, an empty stream yields 0
/// against anything with a different stream.
inline double similarity(const CodeSnippet& a, const CodeSnippet& b) {
  const auto sa = detail::token_shingles(a);
  const auto sb = detail::token_shingles(b);
  if (sa.empty() || sb.empty()) {
    const auto ta = tokenize_lenient(a.source_text);
    const auto tb = tokenize_lenient(b.source_text);
    if (ta.size() != tb.size()) return 0.0;
    for (std::size_t i = 0; i < ta.size(); ++i) {
      if (ta[i].text != tb[i].text) return 0.0;
    }
    return 1.0;
  }
  return detail::jaccard(sa, sb);
}

struct SampleDecision {
  std::string package_path;
  std::string accepted_id;       ///< empty when the package was skipped
  double max_similarity = 0.0;   ///< against the sample at acceptance time
  std::vector<std::string> rejected_similar;    ///< too close to the sample
  std::vector<std::string> rejected_few_pairs;  ///< not enough pairs
};

struct SampleResult {
  std::vector<std::string> sampled_ids;  ///< acceptance order, seed first
  std::vector<SampleDecision> log;
};

/// Greedy diversity sampling: filter to loc < max_loc, seed with one random
/// method from one random package, then visit the remaining packages in
/// seeded random order and accept per package the least-similar candidate
/// (minimum of the maximum similarity to the sample) that clears the
/// similarity threshold against every sampled method and has at least
/// min_pairs pairs. The seed method is exempt from the pair minimum.
inline SampleResult sample(const Corpus& corpus, const SamplerConfig& config,
                           const SimilarityFn& metric) {
  SampleResult result;
  std::map<std::string, std::vector<const CodeSnippet*>> by_package;
  for (const CodeSnippet& s : corpus.snippets) {
    if (s.loc < config.max_loc) by_package[s.package_path].push_back(&s);
  }
  if (by_package.empty()) return result;

  std::vector<std::string> packages;
  packages.reserve(by_package.size());
  for (const auto& [package, methods] : by_package) packages.push_back(package);
  SplitMix64 rng(config.seed);
  deterministic_shuffle(packages, rng);

  std::vector<const CodeSnippet*> sampled;
  auto pair_count = [&](const CodeSnippet& s) {
    auto it = corpus.pairs_by_snippet.find(s.id);
    return it == corpus.pairs_by_snippet.end() ? 0 : static_cast<int>(it->second.size());
  };

  {
    const auto& methods = by_package[packages.front()];
    const CodeSnippet* seed_method = methods[rng.below(methods.size())];
    sampled.push_back(seed_method);
    result.sampled_ids.push_back(seed_method->id);
    result.log.push_back({packages.front(), seed_method->id, 0.0, {}, {}});
  }

  for (std::size_t pi = 1; pi < packages.size(); ++pi) {
    SampleDecision decision;
    decision.package_path = packages[pi];
    const CodeSnippet* best = nullptr;
    double best_max_sim = 2.0;
    for (const CodeSnippet* candidate : by_package[packages[pi]]) {
      double max_sim = 0.0;
      bool too_similar = false;
      for (const CodeSnippet* accepted : sampled) {
        const double sim = metric(*candidate, *accepted);
        max_sim = std::max(max_sim, sim);
        if (sim >= config.similarity_threshold) {
          too_similar = true;
          break;
        }
      }
      if (too_similar) {
        decision.rejected_similar.push_back(candidate->id);
        continue;
      }
      if (pair_count(*candidate) < config.min_pairs) {
        decision.rejected_few_pairs.push_back(candidate->id);
        continue;
      }
      if (max_sim < best_max_sim || (max_sim == best_max_sim && best && candidate->id < best->id)) {
        best = candidate;
        best_max_sim = max_sim;
      }
    }
    if (best) {
      sampled.push_back(best);
      result.sampled_ids.push_back(best->id);
      decision.accepted_id = best->id;
      decision.max_similarity = best_max_sim;
    }
    result.log.push_back(std::move(decision));
  }
  return result;
}

/// Default-metric overload with shingle sets cached per snippet.
inline SampleResult sample(const Corpus& corpus, const SamplerConfig& config) {
  auto cache = std::make_shared<std::map<const CodeSnippet*, std::set<std::string>>>();
  SimilarityFn cached = [cache](const CodeSnippet& a, const CodeSnippet& b) {
    auto get = [&](const CodeSnippet& s) -> const std::set<std::string>& {
      auto it = cache->find(&s);
      if (it == cache->end()) it = cache->emplace(&s, detail::token_shingles(s)).first;
      return it->second;
    };
    const auto& sa = get(a);
    const auto& sb = get(b);
    if (sa.empty() || sb.empty()) return similarity(a, b);
    return detail::jaccard(sa, sb);
  };
  return sample(corpus, config, cached);
}

/// Reduces a corpus to the sampled snippets (and their pairs), in acceptance
/// order.
inline Corpus reduce_corpus(const Corpus& corpus, const std::vector<std::string>& sampled_ids) {
  std::vector<CodeSnippet> snippets;
  std::vector<NamePair> pairs;
  for (const std::string& id : sampled_ids) {
    const CodeSnippet* s = corpus.find_snippet(id);
    if (!s) throw CorpusError("sampled id not in corpus: " + id);
    snippets.push_back(*s);
    for (const NamePair* p : corpus.snippet_pairs(id)) pairs.push_back(*p);
  }
  return Corpus::build(std::move(snippets), std::move(pairs));
}

inline void write_sample_log(const SampleResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write sampling log: " + path.string());
  for (const SampleDecision& d : result.log) {
    nlohmann::ordered_json obj;
    obj["package"] = d.package_path;
    if (d.accepted_id.empty()) {
      obj["accepted"] = nullptr;
    } else {
      obj["accepted"] = d.accepted_id;
      obj["max_similarity"] = d.max_similarity;
    }
    obj["rejected_similar"] = d.rejected_similar;
    obj["rejected_few_pairs"] = d.rejected_few_pairs;
    out << obj.dump() << '\n';
  }
}

}  // namespace fqnprobe
