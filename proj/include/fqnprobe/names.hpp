#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fqnprobe {

/// Syntactic category of a cannot-be-resolved simple name.
enum class NameKind {
  DeclType,  ///< type position of a variable declaration
  InstType,  ///< type after `new` (instantiation or array creation)
  Receiver,  ///< object or type a method/field is accessed on
  Member,    ///< method/field name of the first (non-chained) access
};

inline std::string_view to_wire(NameKind kind) {
  switch (kind) {
    case NameKind::DeclType: return "decl";
    case NameKind::InstType: return "inst";
    case NameKind::Receiver: return "recv";
    case NameKind::Member: return "member";
  }
  return "decl";
}

inline std::optional<NameKind> name_kind_from_wire(std::string_view s) {
  if (s == "decl") return NameKind::DeclType;
  if (s == "inst") return NameKind::InstType;
  if (s == "recv") return NameKind::Receiver;
  if (s == "member") return NameKind::Member;
  return std::nullopt;
}

/// Form tag carried by a simple name: `List`, `List<>`, `List[]`, `List()`.
enum class NameForm { Plain, Generic, Array, Call };

inline std::string_view form_suffix(NameForm form) {
  switch (form) {
    case NameForm::Plain: return "";
    case NameForm::Generic: return "<>";
    case NameForm::Array: return "[]";
    case NameForm::Call: return "()";
  }
  return "";
}

struct SplitName {
  std::string_view base;
  NameForm form = NameForm::Plain;
};

/// Splits a form-tagged simple name into base identifier and form suffix.
inline SplitName split_form(std::string_view tagged) {
  if (tagged.size() >= 2) {
    const std::string_view tail = tagged.substr(tagged.size() - 2);
    if (tail == "<>") return {tagged.substr(0, tagged.size() - 2), NameForm::Generic};
    if (tail == "[]") return {tagged.substr(0, tagged.size() - 2), NameForm::Array};
    if (tail == "()") return {tagged.substr(0, tagged.size() - 2), NameForm::Call};
  }
  return {tagged, NameForm::Plain};
}

inline std::string with_form(std::string_view base, NameForm form) {
  std::string out(base);
  out += form_suffix(form);
  return out;
}

/// Base identifier with the form suffix stripped.
inline std::string base_name(std::string_view tagged) {
  return std::string(split_form(tagged).base);
}

/// A well-formed tagged name: non-empty base, no whitespace, no bracket
/// characters outside the single optional suffix.
inline bool is_valid_simple_name(std::string_view tagged) {
  const SplitName split = split_form(tagged);
  if (split.base.empty()) return false;
  for (char c : split.base) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return false;
    if (c == '<' || c == '>' || c == '[' || c == ']' || c == '(' || c == ')') return false;
  }
  return true;
}

}  // namespace fqnprobe
