#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fqnprobe/composer.hpp"
#include "fqnprobe/normalizer.hpp"
#include "support/desk.hpp"

using namespace fqnprobe;

namespace {

const std::filesystem::path kGoldenDir = std::filesystem::path(FQNPROBE_TEST_DIR) / "golden";
constexpr std::uint64_t kGoldenSeed = 20240810;

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("45 golden task inputs are byte-exact") {
  const Corpus corpus = testing::desk_corpus();
  const CorpusStats stats = compute_stats(corpus);
  const CodeSnippet& snippet = *corpus.find_snippet("d01");
  std::vector<NamePair> pairs;
  for (const NamePair* p : corpus.snippet_pairs("d01")) pairs.push_back(*p);
  const NamePair* target = nullptr;
  for (const NamePair& p : pairs) {
    if (p.simple_name == "br") target = &p;
  }
  REQUIRE(target != nullptr);

  int compared = 0;
  for (const auto& [name, config] : ablation_configs(kGoldenSeed)) {
    for (ShotKind kind : kAllShots) {
      const TaskInput task =
          compose(snippet, pairs, *target, {kind, std::nullopt}, config, stats);
      const auto path = kGoldenDir / (name + "__" + std::string(shot_name(kind)) + ".java");
      INFO("golden file: " << path);
      REQUIRE(std::filesystem::exists(path));
      CHECK(task.rendered_text == slurp(path));
      ++compared;
    }
  }
  CHECK(compared == 45);
}

TEST_CASE("task-input counts multiply out") {
  // Desk corpus: one file per pair and shot.
  const Corpus corpus = testing::desk_corpus();
  const std::size_t pair_count = corpus.pairs.size();
  REQUIRE(pair_count >= 100);
  CHECK(pair_count * kShotCount == 5 * pair_count);

  // Full-scale arithmetic: 8,258 pairs make 41,290 inputs per
  // configuration and 371,610 across the nine-configuration ablation.
  constexpr std::int64_t kPairs = 8258;
  CHECK(kPairs * kShotCount == 41290);
  CHECK(kPairs * kShotCount * 9 == 371610);
  CHECK(ablation_configs(kGoldenSeed).size() == 9);
}

TEST_CASE("desk corpus fixture file matches the in-memory construction") {
  const auto path = std::filesystem::path(FQNPROBE_TEST_DIR) / "data" / "desk_corpus.jsonl";
  REQUIRE(std::filesystem::exists(path));
  const Corpus from_file = load_corpus(path);
  const Corpus built = testing::desk_corpus();
  REQUIRE(from_file.snippets.size() == built.snippets.size());
  REQUIRE(from_file.pairs.size() == built.pairs.size());
  for (std::size_t i = 0; i < built.pairs.size(); ++i) {
    CHECK(from_file.pairs[i].snippet_id == built.pairs[i].snippet_id);
    CHECK(from_file.pairs[i].simple_name == built.pairs[i].simple_name);
    CHECK(from_file.pairs[i].fqn == built.pairs[i].fqn);
    CHECK(from_file.pairs[i].kind == built.pairs[i].kind);
    CHECK(from_file.pairs[i].occurrence_count == built.pairs[i].occurrence_count);
  }
  for (std::size_t i = 0; i < built.snippets.size(); ++i) {
    CHECK(from_file.snippets[i].source_text == built.snippets[i].source_text);
    CHECK(from_file.snippets[i].library == built.snippets[i].library);
  }
}

TEST_CASE("desk corpus satisfies every shot setting") {
  const Corpus corpus = testing::desk_corpus();
  CHECK(corpus.snippets.size() >= 20);
  for (const CodeSnippet& s : corpus.snippets) {
    CHECK(corpus.snippet_pairs(s.id).size() >= 4);
  }
}

TEST_CASE("gold FQNs in the desk corpus are normalization-stable") {
  const Corpus corpus = testing::desk_corpus();
  for (const NamePair& pair : corpus.pairs) {
    CHECK(normalize_fqn(pair.fqn) == pair.fqn);
  }
}

TEST_CASE("bucket counts partition the distinct FQNs of a corpus") {
  const Corpus corpus = testing::desk_corpus();
  const CorpusStats stats = compute_stats(corpus);
  std::size_t by_length[kBucketCount] = {};
  std::size_t by_usage[kBucketCount] = {};
  for (const auto& [fqn, s] : stats.by_fqn) {
    const PropertyBuckets buckets = bucketize(s);
    ++by_length[static_cast<int>(buckets.length_bucket)];
    ++by_usage[static_cast<int>(buckets.usage_bucket)];
  }
  std::size_t length_total = 0, usage_total = 0;
  for (int b = 0; b < kBucketCount; ++b) {
    length_total += by_length[b];
    usage_total += by_usage[b];
  }
  CHECK(length_total == stats.by_fqn.size());
  CHECK(usage_total == stats.by_fqn.size());
  CHECK(stats.by_fqn.size() <= corpus.pairs.size());
}

TEST_CASE("form round-trip is lossless over every desk pair") {
  const Corpus corpus = testing::desk_corpus();
  for (const NamePair& pair : corpus.pairs) {
    const SplitName split = split_form(pair.simple_name);
    CHECK(with_form(split.base, split.form) == pair.simple_name);
  }
}
