#pragma once

// Post-processing of raw completions into comparable FQNs: first-line
// extraction, bracket emptying, delimiter repair, and exact-match scoring.
// Every function here is total; no input text fails.

#include <string>
#include <string_view>
#include <vector>

#include "fqnprobe/backend.hpp"

namespace fqnprobe {

/// Marker for a failed completion; never matches any ground-truth FQN.
inline constexpr std::string_view kFailureMarker = "...";

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t begin = 0, end = s.size();
  while (begin < end && (s[begin] == ' ' || s[begin] == '\t' || s[begin] == '\r')) ++begin;
  while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
  return std::string(s.substr(begin, end - begin));
}

inline bool is_quote(char c) { return c == '"' || c == '\'' || c == '`'; }

inline bool is_open_bracket(char c) { return c == '(' || c == '[' || c == '<'; }

inline char closing_for(char open) {
  switch (open) {
    case '(': return ')';
    case '[': return ']';
    default: return '>';
  }
}

// Empties every matched bracket pair, innermost first: keeps the brackets,
// drops the contents. Unmatched brackets stay as they are.
inline std::string empty_bracket_contents(std::string_view s) {
  std::string out;
  std::vector<std::size_t> stack;  // positions of open brackets in `out`
  out.reserve(s.size());
  for (char c : s) {
    if (is_open_bracket(c)) {
      stack.push_back(out.size());
      out += c;
      continue;
    }
    if ((c == ')' || c == ']' || c == '>') && !stack.empty() &&
        closing_for(out[stack.back()]) == c) {
      out.resize(stack.back() + 1);
      out += c;
      stack.pop_back();
      continue;
    }
    out += c;
  }
  return out;
}

}  // namespace detail

/// Raw predicted text of a completion result: the first line, trimmed. A
/// missing completion becomes the failure marker.
inline std::string extract_prediction(const CompletionResult& result) {
  if (!result.has_completion()) return std::string(kFailureMarker);
  std::string_view raw = *result.text;
  const std::size_t newline = raw.find('\n');
  if (newline != std::string_view::npos) raw = raw.substr(0, newline);
  std::string line = detail::trim(raw);
  if (line.empty()) return std::string(kFailureMarker);
  return line;
}

/// Normalizes a predicted FQN, in order: drop quote marks, empty bracket
/// contents (innermost first), turn '#'/'$' delimiters into dots, collapse
/// duplicate dots, trim trailing punctuation that is not a form suffix. An
/// empty result becomes the failure marker.
inline std::string normalize_fqn(std::string_view raw) {
  std::string s = detail::trim(raw);

  std::string unquoted;
  unquoted.reserve(s.size());
  for (char c : s) {
    if (!detail::is_quote(c)) unquoted += c;
  }
  s = detail::empty_bracket_contents(unquoted);

  std::string dotted;
  dotted.reserve(s.size());
  for (char c : s) {
    dotted += (c == '#' || c == '$') ? '.' : c;
  }

  std::string collapsed;
  collapsed.reserve(dotted.size());
  for (char c : dotted) {
    if (c == '.' && !collapsed.empty() && collapsed.back() == '.') continue;
    collapsed += c;
  }

  while (!collapsed.empty()) {
    const char back = collapsed.back();
    if (back == '.' || back == ',' || back == ';' || back == ':' || back == ' ' ||
        back == '\t' || back == '\r') {
      collapsed.pop_back();
    } else {
      break;
    }
  }
  collapsed = detail::trim(collapsed);
  if (collapsed.empty()) return std::string(kFailureMarker);
  return collapsed;
}

/// Exact, case-sensitive match; the failure marker never matches.
inline bool is_correct(std::string_view normalized_prediction, std::string_view gold) {
  if (normalized_prediction == kFailureMarker) return false;
  return normalized_prediction == gold;
}

/// One scored completion.
struct Prediction {
  std::string raw;
  std::string normalized;
  bool failed = false;
};

inline Prediction make_prediction(const CompletionResult& result) {
  Prediction p;
  p.raw = extract_prediction(result);
  p.normalized = normalize_fqn(p.raw);
  p.failed = p.normalized == kFailureMarker;
  return p;
}

}  // namespace fqnprobe
