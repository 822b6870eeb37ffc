#pragma once

// Lenient tokenizer and simple-name extraction for partial Java snippets.
// Everything here runs on uncompilable fragments: no grammar, no classpath,
// no type checking. Extraction is heuristic by design and total — any input
// yields a (possibly empty) hit list.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fqnprobe/names.hpp"

namespace fqnprobe {

enum class TokenKind { Identifier, Keyword, Number, Text, Punct };

struct Token {
  TokenKind kind;
  std::string text;
  int line = 1;  // 1-based
};

inline bool is_java_keyword(std::string_view s) {
  static const std::unordered_set<std::string_view> kKeywords = {
      "abstract", "assert",    "boolean",  "break",      "byte",     "case",
      "catch",    "char",      "class",    "const",      "continue", "default",
      "do",       "double",    "else",     "enum",       "extends",  "final",
      "finally",  "float",     "for",      "goto",       "if",       "implements",
      "import",   "instanceof","int",      "interface",  "long",     "native",
      "new",      "package",   "private",  "protected",  "public",   "return",
      "short",    "static",    "strictfp", "super",      "switch",   "synchronized",
      "this",     "throw",     "throws",   "transient",  "try",      "void",
      "volatile", "while",     "true",     "false",      "null",     "var",
  };
  return kKeywords.count(s) > 0;
}

inline bool is_primitive_type(std::string_view s) {
  static const std::unordered_set<std::string_view> kPrimitives = {
      "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
  };
  return kPrimitives.count(s) > 0;
}

/// Tokenizes any text. Comments are dropped, string/char literals collapse to
/// single Text tokens, common multi-character operators are kept whole, and
/// every unknown character becomes a one-character Punct token.
inline std::vector<Token> tokenize_lenient(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  const std::size_t n = src.size();

  auto is_ident_start = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == '$';
  };
  auto is_ident_part = [&](char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); };
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };

  while (i < n) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
      ++i;
      continue;
    }
    // Line comment.
    if (c == '/' && i + 1 < n && src[i + 1] == '/') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    // Block comment; unterminated runs to end of input.
    if (c == '/' && i + 1 < n && src[i + 1] == '*') {
      i += 2;
      while (i < n && !(src[i] == '*' && i + 1 < n && src[i + 1] == '/')) {
        if (src[i] == '\n') ++line;
        ++i;
      }
      i = (i < n) ? i + 2 : n;
      continue;
    }
    // String / char literal; unterminated runs to end of line.
    if (c == '"' || c == '\'') {
      const char quote = c;
      const int start_line = line;
      std::string text(1, quote);
      ++i;
      while (i < n && src[i] != quote && src[i] != '\n') {
        if (src[i] == '\\' && i + 1 < n) {
          text += src[i];
          text += src[i + 1];
          i += 2;
          continue;
        }
        text += src[i];
        ++i;
      }
      if (i < n && src[i] == quote) {
        text += quote;
        ++i;
      }
      out.push_back({TokenKind::Text, std::move(text), start_line});
      continue;
    }
    if (is_digit(c)) {
      std::size_t j = i;
      while (j < n && (is_ident_part(src[j]))) ++j;
      // One optional fraction part, only when a digit follows the dot.
      if (j < n && src[j] == '.' && j + 1 < n && is_digit(src[j + 1])) {
        ++j;
        while (j < n && is_ident_part(src[j])) ++j;
      }
      out.push_back({TokenKind::Number, std::string(src.substr(i, j - i)), line});
      i = j;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_part(src[j])) ++j;
      std::string text(src.substr(i, j - i));
      const TokenKind kind = is_java_keyword(text) ? TokenKind::Keyword : TokenKind::Identifier;
      out.push_back({kind, std::move(text), line});
      i = j;
      continue;
    }
    // Multi-character operators that matter for disambiguation; longest first.
    static const std::string_view kOps3[] = {">>>"};
    static const std::string_view kOps2[] = {"&&", "||", "==", "!=", "<=", ">=", "->", "::",
                                             "++", "--", "+=", "-=", "*=", "/=", "%=", "&=",
                                             "|=", "^=", ">>", "<<"};
    std::string_view rest = src.substr(i);
    std::string_view matched;
    for (auto op : kOps3) {
      if (rest.substr(0, op.size()) == op) {
        matched = op;
        break;
      }
    }
    if (matched.empty()) {
      for (auto op : kOps2) {
        if (rest.substr(0, op.size()) == op) {
          matched = op;
          break;
        }
      }
    }
    if (!matched.empty()) {
      out.push_back({TokenKind::Punct, std::string(matched), line});
      i += matched.size();
      continue;
    }
    out.push_back({TokenKind::Punct, std::string(1, c), line});
    ++i;
  }
  return out;
}

/// One extracted name. A snippet yields at most one hit per unique
/// form-tagged simple name; `line` is the first occurrence.
struct ScanHit {
  std::string simple_name;
  NameKind kind = NameKind::DeclType;
  int line = 1;
  int occurrence_count = 1;
};

struct FormContext {
  bool generic = false;
  bool array = false;
  bool call = false;
};

/// Applies the single form suffix. Array wins over generic wins over call:
/// `List<String>[]` tags as `List[]`, `new List<String>()` as `List<>`.
inline std::string canonical_form(std::string_view base, FormContext ctx) {
  if (ctx.array) return with_form(base, NameForm::Array);
  if (ctx.generic) return with_form(base, NameForm::Generic);
  if (ctx.call) return with_form(base, NameForm::Call);
  return with_form(base, NameForm::Plain);
}

namespace detail {

// Token budget for deciding whether a '<' opens a type-argument list.
inline constexpr std::size_t kGenericLookahead = 64;

// Returns the index one past the matching '>' when tokens[open] plausibly
// opens a generic argument list, i.e. only type-ish tokens appear before the
// brackets balance. '>>' and '>>>' close two and three levels.
inline std::optional<std::size_t> match_generic_span(const std::vector<Token>& toks,
                                                     std::size_t open) {
  if (open >= toks.size() || toks[open].text != "<") return std::nullopt;
  int depth = 1;
  std::size_t i = open + 1;
  const std::size_t budget = open + kGenericLookahead;
  while (i < toks.size() && i <= budget) {
    const Token& t = toks[i];
    if (t.kind == TokenKind::Punct) {
      if (t.text == "<") {
        ++depth;
      } else if (t.text == ">" || t.text == ">>" || t.text == ">>>") {
        depth -= static_cast<int>(t.text.size());
        if (depth <= 0) return i + 1;
      } else if (t.text == "," || t.text == "." || t.text == "?" || t.text == "&" ||
                 t.text == "[" || t.text == "]") {
        // allowed inside type arguments
      } else {
        return std::nullopt;
      }
    } else if (t.kind == TokenKind::Keyword) {
      if (t.text != "extends" && t.text != "super" && !is_primitive_type(t.text)) {
        return std::nullopt;
      }
    } else if (t.kind != TokenKind::Identifier) {
      return std::nullopt;
    }
    ++i;
  }
  return std::nullopt;
}

// A parsed type reference: dotted segments, optional generic arguments,
// optional empty [] pairs. Nested holds identifiers found inside the
// argument list together with their own form.
struct TypeRef {
  std::vector<std::size_t> segments;
  bool generic = false;
  bool array = false;
  std::size_t end = 0;
  std::vector<std::pair<std::size_t, NameForm>> nested;
};

inline std::optional<TypeRef> parse_type_ref(const std::vector<Token>& toks, std::size_t i,
                                             std::size_t limit);

// Collects simple type names used inside a generic span (exclusive bounds).
inline void collect_type_arguments(const std::vector<Token>& toks, std::size_t from,
                                   std::size_t to,
                                   std::vector<std::pair<std::size_t, NameForm>>& out) {
  std::size_t i = from;
  while (i < to) {
    if (toks[i].kind == TokenKind::Identifier) {
      if (auto sub = parse_type_ref(toks, i, to)) {
        if (sub->segments.size() == 1) {
          NameForm form = NameForm::Plain;
          if (sub->array) {
            form = NameForm::Array;
          } else if (sub->generic) {
            form = NameForm::Generic;
          }
          out.emplace_back(sub->segments.front(), form);
        }
        for (const auto& nested : sub->nested) out.push_back(nested);
        i = sub->end;
        continue;
      }
    }
    ++i;
  }
}

// `limit` bounds the parse (exclusive); nested argument parses must never
// consume tokens that belong to the enclosing type.
inline std::optional<TypeRef> parse_type_ref(const std::vector<Token>& toks, std::size_t i,
                                             std::size_t limit) {
  const std::size_t end_bound = std::min(limit, toks.size());
  if (i >= end_bound || toks[i].kind != TokenKind::Identifier) return std::nullopt;
  TypeRef ref;
  ref.segments.push_back(i);
  std::size_t j = i + 1;
  while (j + 1 < end_bound && toks[j].kind == TokenKind::Punct && toks[j].text == "." &&
         toks[j + 1].kind == TokenKind::Identifier) {
    ref.segments.push_back(j + 1);
    j += 2;
  }
  if (j < end_bound && toks[j].kind == TokenKind::Punct && toks[j].text == "<") {
    if (auto close = match_generic_span(toks, j)) {
      // A '>>' token can close this span and the enclosing one at once, so
      // the close may sit one past the bound; clamp instead of rejecting.
      ref.generic = true;
      collect_type_arguments(toks, j + 1, std::min(*close - 1, end_bound), ref.nested);
      j = std::min(*close, end_bound);
    }
  }
  while (j + 1 < end_bound && toks[j].text == "[" && toks[j + 1].text == "]") {
    ref.array = true;
    j += 2;
  }
  ref.end = j;
  return ref;
}

inline std::optional<TypeRef> parse_type_ref(const std::vector<Token>& toks, std::size_t i) {
  return parse_type_ref(toks, i, toks.size());
}

}  // namespace detail

/// Extracts the cannot-be-resolved simple names of a snippet:
///   1. DeclType — type position of a variable declaration,
///   2. InstType — type after `new` (instantiation or array creation),
///   3. Receiver — identifier a method or field is accessed on,
///   4. Member   — the method/field name of that first access.
/// Keywords and primitive types never produce hits; later links of call
/// chains are skipped; import/package lines and annotations are ignored.
inline std::vector<ScanHit> extract_simple_names(std::string_view source) {
  using detail::parse_type_ref;
  const std::vector<Token> toks = tokenize_lenient(source);

  std::vector<ScanHit> hits;
  std::unordered_map<std::string, std::size_t> index;
  auto add_hit = [&](std::string name, NameKind kind, int line) {
    auto it = index.find(name);
    if (it != index.end()) {
      ++hits[it->second].occurrence_count;
      return;
    }
    index.emplace(name, hits.size());
    hits.push_back({std::move(name), kind, line, 1});
  };

  auto emit_type_hits = [&](const detail::TypeRef& ref, NameKind kind, FormContext outer) {
    if (ref.segments.size() == 1) {
      const Token& tok = toks[ref.segments.front()];
      outer.generic = outer.generic || ref.generic;
      outer.array = outer.array || ref.array;
      add_hit(canonical_form(tok.text, outer), kind, tok.line);
    }
    // Qualified (dotted) types are at least partially resolved; only their
    // type arguments stay interesting.
    for (const auto& [idx, form] : ref.nested) {
      add_hit(with_form(toks[idx].text, form), kind, toks[idx].line);
    }
  };

  const std::size_t n = toks.size();
  std::size_t i = 0;
  while (i < n) {
    const Token& t = toks[i];
    const bool after_dot = i > 0 && toks[i - 1].kind == TokenKind::Punct && toks[i - 1].text == ".";

    if (t.kind == TokenKind::Punct && t.text == "@") {
      // Annotation: skip @Name(.Name)* and one balanced argument list.
      std::size_t j = i + 1;
      if (j < n && toks[j].kind == TokenKind::Identifier) {
        ++j;
        while (j + 1 < n && toks[j].text == "." && toks[j + 1].kind == TokenKind::Identifier) {
          j += 2;
        }
        if (j < n && toks[j].text == "(") {
          int depth = 1;
          ++j;
          while (j < n && depth > 0) {
            if (toks[j].text == "(") ++depth;
            if (toks[j].text == ")") --depth;
            ++j;
          }
        }
      }
      i = j;
      continue;
    }

    if (t.kind == TokenKind::Keyword) {
      if (t.text == "import" || t.text == "package") {
        // Skip the rest of the statement (to ';' or end of line).
        const int stmt_line = t.line;
        std::size_t j = i + 1;
        while (j < n && toks[j].text != ";" && toks[j].line == stmt_line) ++j;
        if (j < n && toks[j].text == ";") ++j;
        i = j;
        continue;
      }
      if (t.text == "new") {
        if (auto ref = parse_type_ref(toks, i + 1)) {
          FormContext ctx;
          const bool array_creation =
              ref->array || (ref->end < n && toks[ref->end].text == "[");
          ctx.array = array_creation;
          ctx.generic = ref->generic;
          ctx.call = !array_creation && ref->end < n && toks[ref->end].text == "(";
          emit_type_hits(*ref, NameKind::InstType, ctx);
          i = ref->end;
          continue;
        }
      }
      ++i;
      continue;
    }

    if (t.kind == TokenKind::Identifier && !after_dot) {
      // Declaration: TypeRef Identifier (= | ; | , | ) | :)
      if (auto ref = parse_type_ref(toks, i)) {
        const std::size_t j = ref->end;
        if (j + 1 < n && toks[j].kind == TokenKind::Identifier) {
          const std::string& follow = toks[j + 1].text;
          if (follow == "=" || follow == ";" || follow == "," || follow == ")" ||
              follow == ":") {
            emit_type_hits(*ref, NameKind::DeclType, FormContext{});
            i = j + 1;
            continue;
          }
        }
      }
      // Receiver.member — only at the start of a chain.
      if (i + 2 < n && toks[i + 1].text == "." && toks[i + 2].kind == TokenKind::Identifier) {
        add_hit(t.text, NameKind::Receiver, t.line);
        const Token& member = toks[i + 2];
        const bool call = i + 3 < n && toks[i + 3].text == "(";
        add_hit(call ? member.text + "()" : member.text, NameKind::Member, member.line);
        i += 3;
        continue;
      }
      ++i;
      continue;
    }

    ++i;
  }
  return hits;
}

}  // namespace fqnprobe
