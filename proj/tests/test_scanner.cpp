#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include "fqnprobe/rng.hpp"
#include "fqnprobe/scanner.hpp"

using namespace fqnprobe;

namespace {

std::vector<std::string> token_texts(std::string_view source) {
  std::vector<std::string> out;
  for (const Token& t : tokenize_lenient(source)) out.push_back(t.text);
  return out;
}

const ScanHit* find_hit(const std::vector<ScanHit>& hits, std::string_view name) {
  for (const ScanHit& h : hits) {
    if (h.simple_name == name) return &h;
  }
  return nullptr;
}

std::set<std::string> hit_names(const std::vector<ScanHit>& hits) {
  std::set<std::string> names;
  for (const ScanHit& h : hits) names.insert(h.simple_name);
  return names;
}

// Comment and line-number agnostic identity of a hit set.
std::set<std::string> hit_signature(const std::vector<ScanHit>& hits) {
  std::set<std::string> out;
  for (const ScanHit& h : hits) {
    out.insert(h.simple_name + "|" + std::string(to_wire(h.kind)) + "|" +
               std::to_string(h.occurrence_count));
  }
  return out;
}

}  // namespace

TEST_CASE("tokenize_lenient basic streams") {
  CHECK(token_texts("List<String> l;") ==
        std::vector<std::string>{"List", "<", "String", ">", "l", ";"});
  CHECK(token_texts("br.readLine().toLowerCase()") ==
        std::vector<std::string>{"br", ".", "readLine", "(", ")", ".", "toLowerCase", "(", ")"});
}

TEST_CASE("tokenize_lenient drops comments and keeps literals whole") {
  const auto toks = token_texts("int x = 1; // trailing List<String>\n/* Foo bar */ y = \"a.b()\";");
  CHECK(std::find(toks.begin(), toks.end(), "List") == toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "Foo") == toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "\"a.b()\"") != toks.end());
}

TEST_CASE("tokenize_lenient is total on arbitrary bytes") {
  const std::string garbage = "\x01\x7f\xc3\xa9 foo @@ ### new\"unterminated";
  const auto toks = tokenize_lenient(garbage);
  CHECK(!toks.empty());
  // Unknown bytes become one-character punctuation tokens.
  CHECK(toks.front().kind == TokenKind::Punct);
  CHECK(toks.front().text.size() == 1);
}

TEST_CASE("tokenize_lenient merges operators needed for disambiguation") {
  const auto toks = token_texts("a && b >> c >>> d -> e");
  CHECK(std::find(toks.begin(), toks.end(), "&&") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), ">>") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), ">>>") != toks.end());
  CHECK(std::find(toks.begin(), toks.end(), "->") != toks.end());
}

TEST_CASE("generic angle brackets vs comparison operators") {
  // a<b && c>d is a pair of comparisons, not a generic type use.
  const auto hits = extract_simple_names("boolean r = a<b && c>d;");
  CHECK(find_hit(hits, "a<>") == nullptr);
  // List<String> is a generic type use.
  const auto generic_hits = extract_simple_names("List<String> l;");
  CHECK(find_hit(generic_hits, "List<>") != nullptr);
  CHECK(find_hit(generic_hits, "String") != nullptr);
}

TEST_CASE("declaration type extraction") {
  const auto hits = extract_simple_names("File file = open(path);");
  REQUIRE(find_hit(hits, "File") != nullptr);
  CHECK(find_hit(hits, "File")->kind == NameKind::DeclType);
  CHECK(find_hit(hits, "file") == nullptr);
  CHECK(find_hit(hits, "path") == nullptr);
}

TEST_CASE("primitive declarations produce no hits") {
  CHECK(extract_simple_names("int x = 3;").empty());
  CHECK(extract_simple_names("double d = 0.5; boolean done = false;").empty());
}

TEST_CASE("instantiation and form tagging") {
  SECTION("constructor form") {
    const auto hits = extract_simple_names("f = new File(path);");
    REQUIRE(find_hit(hits, "File()") != nullptr);
    CHECK(find_hit(hits, "File()")->kind == NameKind::InstType);
  }
  SECTION("generic instantiation") {
    const auto hits = extract_simple_names("names = new List<String>();");
    REQUIRE(find_hit(hits, "List<>") != nullptr);
    CHECK(find_hit(hits, "List<>")->kind == NameKind::InstType);
    REQUIRE(find_hit(hits, "String") != nullptr);
    CHECK(find_hit(hits, "String")->kind == NameKind::InstType);
  }
  SECTION("array creation and array declaration") {
    const auto hits = extract_simple_names("String[] a = new String[3];");
    REQUIRE(find_hit(hits, "String[]") != nullptr);
    CHECK(find_hit(hits, "String[]")->kind == NameKind::DeclType);
    CHECK(find_hit(hits, "String[]")->occurrence_count == 2);
  }
  SECTION("diamond instantiation") {
    const auto hits = extract_simple_names("List<String> l = new ArrayList<>();");
    REQUIRE(find_hit(hits, "ArrayList<>") != nullptr);
    CHECK(find_hit(hits, "ArrayList<>")->kind == NameKind::InstType);
  }
  SECTION("generic plus array resolves to array form") {
    const auto hits = extract_simple_names("List<String>[] parts;");
    CHECK(find_hit(hits, "List[]") != nullptr);
    CHECK(find_hit(hits, "List<>") == nullptr);
  }
  SECTION("array suffix of the outer type never leaks into nested arguments") {
    const auto hits = extract_simple_names("Map<String, List<Integer>>[] grid;");
    CHECK(find_hit(hits, "Map[]") != nullptr);
    CHECK(find_hit(hits, "List<>") != nullptr);
    CHECK(find_hit(hits, "List[]") == nullptr);
    CHECK(find_hit(hits, "Integer") != nullptr);
  }
}

TEST_CASE("receiver and member hits, chained calls excluded") {
  const auto hits = extract_simple_names("String line = br.readLine().toLowerCase();");
  REQUIRE(find_hit(hits, "br") != nullptr);
  CHECK(find_hit(hits, "br")->kind == NameKind::Receiver);
  REQUIRE(find_hit(hits, "readLine()") != nullptr);
  CHECK(find_hit(hits, "readLine()")->kind == NameKind::Member);
  CHECK(find_hit(hits, "toLowerCase()") == nullptr);
  CHECK(find_hit(hits, "toLowerCase") == nullptr);
}

TEST_CASE("field access member is untagged") {
  const auto hits = extract_simple_names("System.out.println(value);");
  REQUIRE(find_hit(hits, "System") != nullptr);
  CHECK(find_hit(hits, "System")->kind == NameKind::Receiver);
  REQUIRE(find_hit(hits, "out") != nullptr);
  CHECK(find_hit(hits, "out")->kind == NameKind::Member);
  CHECK(find_hit(hits, "println()") == nullptr);
}

TEST_CASE("static call on a capitalized type is a receiver") {
  const auto hits = extract_simple_names("Collections.sort(items);");
  REQUIRE(find_hit(hits, "Collections") != nullptr);
  CHECK(find_hit(hits, "Collections")->kind == NameKind::Receiver);
  REQUIRE(find_hit(hits, "sort()") != nullptr);
  CHECK(find_hit(hits, "sort()")->kind == NameKind::Member);
}

TEST_CASE("exemplar snippet covers all four kinds") {
  const std::string snippet =
      "File file;\n"
      "list = new List<String>();\n"
      "String line = br.readLine().toLowerCase();\n";
  const auto hits = extract_simple_names(snippet);
  REQUIRE(find_hit(hits, "File") != nullptr);
  CHECK(find_hit(hits, "File")->kind == NameKind::DeclType);
  CHECK(find_hit(hits, "File")->line == 1);
  REQUIRE(find_hit(hits, "List<>") != nullptr);
  CHECK(find_hit(hits, "List<>")->kind == NameKind::InstType);
  REQUIRE(find_hit(hits, "String") != nullptr);
  CHECK(find_hit(hits, "String")->occurrence_count == 2);
  REQUIRE(find_hit(hits, "br") != nullptr);
  CHECK(find_hit(hits, "br")->kind == NameKind::Receiver);
  REQUIRE(find_hit(hits, "readLine()") != nullptr);
  CHECK(find_hit(hits, "readLine()")->kind == NameKind::Member);
  CHECK(hit_names(hits) ==
        std::set<std::string>{"File", "List<>", "String", "br", "readLine()"});
}

TEST_CASE("this and super accesses are ignored") {
  const auto hits = extract_simple_names("this.count = 1; super.refresh();");
  CHECK(hits.empty());
}

TEST_CASE("annotations are ignored") {
  const auto hits = extract_simple_names("@Override\npublic void run() { worker.start(); }");
  CHECK(find_hit(hits, "Override") == nullptr);
  CHECK(find_hit(hits, "worker") != nullptr);
}

TEST_CASE("import and package lines are ignored") {
  const std::string snippet =
      "package com.example.app;\n"
      "import java.util.List;\n"
      "List<String> l = new ArrayList<>();\n";
  const auto hits = extract_simple_names(snippet);
  CHECK(find_hit(hits, "java") == nullptr);
  CHECK(find_hit(hits, "com") == nullptr);
  CHECK(find_hit(hits, "List<>") != nullptr);
}

TEST_CASE("qualified type references produce no outer hit") {
  const auto hits = extract_simple_names("java.util.Map<String, Long> m = null;");
  CHECK(find_hit(hits, "java") == nullptr);
  CHECK(find_hit(hits, "Map<>") == nullptr);
  CHECK(find_hit(hits, "String") != nullptr);
}

TEST_CASE("enhanced for declarations") {
  const auto hits = extract_simple_names("for (File entry : entries) { entry.delete(); }");
  REQUIRE(find_hit(hits, "File") != nullptr);
  CHECK(find_hit(hits, "File")->kind == NameKind::DeclType);
  CHECK(find_hit(hits, "entry") != nullptr);  // receiver use inside the body
}

TEST_CASE("method parameters count as declarations") {
  const auto hits = extract_simple_names("void copy(Reader in, Writer out) { }");
  CHECK(find_hit(hits, "Reader") != nullptr);
  CHECK(find_hit(hits, "Writer") != nullptr);
}

TEST_CASE("keywords and literals never produce hits") {
  const auto hits = extract_simple_names(
      "if (x) { return new int[3]; } else { while (true) { break; } }");
  for (const ScanHit& h : hits) {
    CHECK(!is_java_keyword(split_form(h.simple_name).base));
  }
  CHECK(hits.empty());
}

TEST_CASE("extraction is deterministic and comment-insensitive") {
  const std::string with_comments =
      "// leading comment with Foo.bar()\n"
      "File f = new File(p); /* List<Long> */\n"
      "buf.flush();\n";
  const std::string stripped =
      "File f = new File(p); \n"
      "buf.flush();\n";
  CHECK(hit_signature(extract_simple_names(with_comments)) ==
        hit_signature(extract_simple_names(stripped)));
  CHECK(hit_signature(extract_simple_names(with_comments)) ==
        hit_signature(extract_simple_names(with_comments)));
}

TEST_CASE("every member hit has a receiver or type hit at the same site") {
  const std::string snippet =
      "Parser p = new Parser();\n"
      "p.parse(input);\n"
      "Config.load(path).apply();\n"
      "helper.run();\n";
  const auto hits = extract_simple_names(snippet);
  for (const ScanHit& h : hits) {
    if (h.kind != NameKind::Member) continue;
    const bool companion =
        std::any_of(hits.begin(), hits.end(), [&](const ScanHit& other) {
          return other.kind != NameKind::Member && other.line == h.line;
        });
    CHECK(companion);
  }
}

TEST_CASE("extraction is total and keyword-free on random text") {
  const std::vector<std::string> vocab = {
      "new",  "int",   "File",  "br",   "(",  ")",  "<",  ">",  "[",    "]",
      ";",    ".",     "=",     ",",    "{",  "}",  "\"", "//", "/*",   "*/",
      "for",  "while", "class", "this", "\n", "&&", "@",  "?",  "super"};
  SplitMix64 rng(4242);
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const int length = static_cast<int>(rng.below(60));
    for (int j = 0; j < length; ++j) {
      text += vocab[rng.below(vocab.size())];
      text += ' ';
    }
    const auto hits = extract_simple_names(text);  // must not throw
    for (const ScanHit& h : hits) {
      CHECK(!is_java_keyword(split_form(h.simple_name).base));
      CHECK(!split_form(h.simple_name).base.empty());
    }
  }
}

TEST_CASE("canonical_form precedence") {
  CHECK(canonical_form("List", {.generic = true, .array = false, .call = true}) == "List<>");
  CHECK(canonical_form("List", {.generic = true, .array = true, .call = false}) == "List[]");
  CHECK(canonical_form("File", {.generic = false, .array = false, .call = true}) == "File()");
  CHECK(canonical_form("br", {}) == "br");
}

TEST_CASE("form round-trip is lossless") {
  for (const std::string name : {"List<>", "String[]", "File()", "br"}) {
    const SplitName split = split_form(name);
    CHECK(with_form(split.base, split.form) == name);
  }
}
