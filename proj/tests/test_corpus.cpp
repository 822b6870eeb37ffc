#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>

#include "fqnprobe/corpus.hpp"
#include "fqnprobe/rng.hpp"

using namespace fqnprobe;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fqnprobe_corpus_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

CodeSnippet make_snippet(const std::string& id, const std::string& code,
                         const std::string& package = "com.example") {
  CodeSnippet s;
  s.id = id;
  s.library = "demo";
  s.package_path = package;
  s.source_text = code;
  s.loc = count_nonblank_lines(code);
  return s;
}

}  // namespace

TEST_CASE("count_nonblank_lines") {
  CHECK(count_nonblank_lines("a\nb\nc") == 3);
  CHECK(count_nonblank_lines("a\n\n  \nb\n") == 2);
  CHECK(count_nonblank_lines("") == 0);
  CHECK(count_nonblank_lines("  \t ") == 0);
}

TEST_CASE("fqn helpers") {
  CHECK(fqn_length_tokens("java.io.File") == 3);
  CHECK(fqn_length_tokens("java.util.List<>") == 3);
  CHECK(is_valid_fqn("java.io.File"));
  CHECK(!is_valid_fqn("File"));
  CHECK(!is_valid_fqn("java. io.File"));
  CHECK(!is_valid_fqn("java..File"));
}

TEST_CASE("load_corpus round-trips a single record") {
  const auto path = temp_file("single.jsonl");
  write_file(path,
             R"_({"id":"m1","library":"jdk","package":"com.a","loc":2,)_"
             R"_("code":"File f;\nf.close();","pairs":[)_"
             R"_({"name":"File","fqn":"java.io.File","kind":"decl","count":1},)_"
             R"_({"name":"f","fqn":"java.io.File","kind":"recv","count":1},)_"
             R"_({"name":"close()","fqn":"java.io.File.close()","kind":"member","count":1},)_"
             R"_({"name":"Path","fqn":"java.nio.file.Path","kind":"decl","count":1}]})_"
             "\n");
  const Corpus corpus = load_corpus(path);
  CHECK(corpus.snippets.size() == 1);
  CHECK(corpus.pairs.size() == 4);
  CHECK(corpus.find_snippet("m1") != nullptr);
  CHECK(corpus.snippet_pairs("m1").size() == 4);

  const auto out = temp_file("single_out.jsonl");
  save_corpus(corpus, out);
  const Corpus reloaded = load_corpus(out);
  CHECK(reloaded.snippets.size() == 1);
  CHECK(reloaded.pairs.size() == 4);
  CHECK(reloaded.pairs[0].fqn == corpus.pairs[0].fqn);
}

TEST_CASE("load_corpus rejects duplicate snippet ids") {
  const auto path = temp_file("dup.jsonl");
  const std::string record =
      R"_({"id":"m1","library":"jdk","package":"com.a","loc":1,"code":"int x;","pairs":[]})_";
  write_file(path, record + "\n" + record + "\n");
  CHECK_THROWS_WITH(load_corpus(path), Catch::Matchers::ContainsSubstring(
                                           "duplicate snippet id: m1"));
}

TEST_CASE("load_corpus rejects malformed lines with the line number") {
  const auto path = temp_file("malformed.jsonl");
  write_file(path,
             R"_({"id":"m1","library":"jdk","package":"com.a","loc":1,"code":"int x;","pairs":[]})_"
             "\nnot json at all\n");
  CHECK_THROWS_WITH(load_corpus(path), Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("load_corpus rejects shadowed simple names with the snippet id") {
  const auto path = temp_file("shadow.jsonl");
  write_file(path,
             R"_({"id":"m7","library":"jdk","package":"com.a","loc":1,"code":"Date d;","pairs":[)_"
             R"_({"name":"Date","fqn":"java.util.Date","kind":"decl","count":1},)_"
             R"_({"name":"Date","fqn":"java.sql.Date","kind":"decl","count":1}]})_"
             "\n");
  CHECK_THROWS_WITH(load_corpus(path), Catch::Matchers::ContainsSubstring("m7"));
}

TEST_CASE("load_corpus rejects a wrong loc") {
  const auto path = temp_file("loc.jsonl");
  write_file(path,
             R"_({"id":"m1","library":"jdk","package":"com.a","loc":5,"code":"int x;","pairs":[]})_"
             "\n");
  CHECK_THROWS_AS(load_corpus(path), CorpusError);
}

TEST_CASE("load_corpus rejects invalid fqns and missing files") {
  const auto path = temp_file("badfqn.jsonl");
  write_file(path,
             R"_({"id":"m1","library":"jdk","package":"com.a","loc":1,"code":"File f;","pairs":[)_"
             R"_({"name":"File","fqn":"File","kind":"decl","count":1}]})_"
             "\n");
  CHECK_THROWS_AS(load_corpus(path), CorpusError);
  CHECK_THROWS_AS(load_corpus(temp_file("missing_nope.jsonl")), CorpusError);
}

TEST_CASE("compute_stats counts usage and cardinalities") {
  std::vector<CodeSnippet> snippets;
  std::vector<NamePair> pairs;

  // Date is bound to three distinct FQNs across snippets (SN:FQN = 3).
  snippets.push_back(make_snippet("s1", "Date d = new Date();"));
  pairs.push_back({"s1", "Date", "java.util.Date", NameKind::DeclType, 2});
  snippets.push_back(make_snippet("s2", "Date d;"));
  pairs.push_back({"s2", "Date", "java.sql.Date", NameKind::DeclType, 1});
  snippets.push_back(make_snippet("s3", "Date d;"));
  pairs.push_back({"s3", "Date", "sun.util.calendar.Gregorian.Date", NameKind::DeclType, 1});

  // Three receiver names for one FQN (FQN:SN = 3).
  snippets.push_back(make_snippet("s4", "reader.read();"));
  pairs.push_back({"s4", "reader", "java.io.BufferedReader", NameKind::Receiver, 1});
  snippets.push_back(make_snippet("s5", "br.read();"));
  pairs.push_back({"s5", "br", "java.io.BufferedReader", NameKind::Receiver, 1});
  snippets.push_back(make_snippet("s6", "buffRead.read();"));
  pairs.push_back({"s6", "buffRead", "java.io.BufferedReader", NameKind::Receiver, 3});

  const Corpus corpus = Corpus::build(std::move(snippets), std::move(pairs));
  const CorpusStats stats = compute_stats(corpus);

  REQUIRE(stats.find("java.util.Date") != nullptr);
  CHECK(stats.find("java.util.Date")->sn_fqn == 3);
  CHECK(stats.find("java.sql.Date")->sn_fqn == 3);
  CHECK(stats.find("sun.util.calendar.Gregorian.Date")->sn_fqn == 3);
  CHECK(stats.find("java.util.Date")->usage_count == 2);
  CHECK(stats.find("java.util.Date")->length_tokens == 3);
  CHECK(stats.find("sun.util.calendar.Gregorian.Date")->length_tokens == 5);

  REQUIRE(stats.find("java.io.BufferedReader") != nullptr);
  CHECK(stats.find("java.io.BufferedReader")->fqn_sn == 3);
  CHECK(stats.find("java.io.BufferedReader")->usage_count == 5);
  CHECK(stats.sn_fqn_of_base("Date") == 3);
  CHECK(stats.sn_fqn_of_base("reader") == 1);
}

TEST_CASE("compute_stats strips form suffixes when grouping bases") {
  std::vector<CodeSnippet> snippets;
  std::vector<NamePair> pairs;
  snippets.push_back(make_snippet("s1", "List<String> l = new List<String>();"));
  pairs.push_back({"s1", "List<>", "java.util.List<>", NameKind::DeclType, 1});
  snippets.push_back(make_snippet("s2", "List l;"));
  pairs.push_back({"s2", "List", "java.awt.List", NameKind::DeclType, 1});
  const Corpus corpus = Corpus::build(std::move(snippets), std::move(pairs));
  const CorpusStats stats = compute_stats(corpus);
  // Both forms share the base "List", so both FQNs see SN:FQN = 2.
  CHECK(stats.find("java.util.List<>")->sn_fqn == 2);
  CHECK(stats.find("java.awt.List")->sn_fqn == 2);
}

TEST_CASE("compute_stats is a pure function of the corpus") {
  const auto path = temp_file("pure.jsonl");
  write_file(path,
             R"_({"id":"m1","library":"jdk","package":"com.a","loc":1,"code":"File f;","pairs":[)_"
             R"_({"name":"File","fqn":"java.io.File","kind":"decl","count":2}]})_"
             "\n");
  const CorpusStats a = compute_stats(load_corpus(path));
  const CorpusStats b = compute_stats(load_corpus(path));
  REQUIRE(a.by_fqn.size() == b.by_fqn.size());
  CHECK(a.find("java.io.File")->usage_count == b.find("java.io.File")->usage_count);
  CHECK(a.fqns_per_base == b.fqns_per_base);
}

TEST_CASE("empty corpus yields empty stats") {
  const Corpus corpus = Corpus::build({}, {});
  CHECK(compute_stats(corpus).by_fqn.empty());
}

TEST_CASE("bucketize boundaries") {
  FqnStats s;
  s.fqn = "java.io.File";
  s.length_tokens = 3;
  s.usage_count = 10000;
  s.sn_fqn = 5;
  s.fqn_sn = 1;
  const PropertyBuckets b = bucketize(s);
  CHECK(b.length_bucket == LengthBucket::L2_4);
  CHECK(b.usage_bucket == UsageBucket::U10kPlus);  // lower bound inclusive
  CHECK(b.sn_fqn_bucket == CardinalityBucket::C4Plus);
  CHECK(b.fqn_sn_bucket == CardinalityBucket::C1);

  CHECK(length_bucket(2) == LengthBucket::L2_4);
  CHECK(length_bucket(4) == LengthBucket::L2_4);
  CHECK(length_bucket(5) == LengthBucket::L5_7);
  CHECK(length_bucket(7) == LengthBucket::L5_7);
  CHECK(length_bucket(8) == LengthBucket::L8_10);
  CHECK(length_bucket(10) == LengthBucket::L8_10);
  CHECK(length_bucket(11) == LengthBucket::L11Plus);
  CHECK(length_bucket(40) == LengthBucket::L11Plus);

  CHECK(usage_bucket(1) == UsageBucket::U1_10);
  CHECK(usage_bucket(9) == UsageBucket::U1_10);
  CHECK(usage_bucket(10) == UsageBucket::U10_1k);
  CHECK(usage_bucket(999) == UsageBucket::U10_1k);
  CHECK(usage_bucket(1000) == UsageBucket::U1k_10k);
  CHECK(usage_bucket(9999) == UsageBucket::U1k_10k);
  CHECK(usage_bucket(10000) == UsageBucket::U10kPlus);

  CHECK(cardinality_bucket(1) == CardinalityBucket::C1);
  CHECK(cardinality_bucket(2) == CardinalityBucket::C2);
  CHECK(cardinality_bucket(3) == CardinalityBucket::C3);
  CHECK(cardinality_bucket(4) == CardinalityBucket::C4Plus);
  CHECK(cardinality_bucket(17) == CardinalityBucket::C4Plus);
}

TEST_CASE("buckets partition every stats entry") {
  // Random stats always land in exactly one bucket per dimension.
  SplitMix64 rng(20240811);
  for (int i = 0; i < 2000; ++i) {
    const int length = 2 + static_cast<int>(rng.below(20));
    const std::int64_t usage = 1 + static_cast<std::int64_t>(rng.below(50000));
    int in_length = 0, in_usage = 0;
    for (int b = 0; b < kBucketCount; ++b) {
      if (length_bucket(length) == static_cast<LengthBucket>(b)) ++in_length;
      if (usage_bucket(usage) == static_cast<UsageBucket>(b)) ++in_usage;
    }
    CHECK(in_length == 1);
    CHECK(in_usage == 1);
  }
}
