// Copyright 2026 The citerefine Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "citerefine/segment.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <string>

#include "citerefine/errors.hpp"

namespace citerefine {
namespace {

bool is_ws(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_hspace(char c) { return c == ' ' || c == '\t'; }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Characters that may follow terminal punctuation inside the same sentence.
bool is_closing_quote(char c) { return c == '"' || c == '\'' || c == ')'; }

// No space is re-inserted before these after a marker is removed.
bool hugs_left(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' ||
         c == '?' || c == ')' || c == ']' || c == '}';
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

constexpr std::array<std::string_view, 7> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "Dr.", "Mr.", "Ms.", "vs."};

// `dot` indexes a '.'; the token is the whitespace-delimited word ending there,
// read with citation markers removed so raw and clean text agree.
bool ends_abbreviation(std::string_view text, std::size_t begin,
                       std::size_t dot) {
  std::string word;
  std::size_t k = dot + 1;
  while (k > begin) {
    char c = text[k - 1];
    if (c == ']') {
      std::size_t lb = text.rfind('[', k - 1);
      if (lb != std::string_view::npos && lb >= begin &&
          detail::match_marker(text, lb).length == k - lb) {
        k = lb;
        continue;
      }
    }
    if (is_ws(c)) break;
    word.push_back(c);
    --k;
  }
  std::reverse(word.begin(), word.end());
  std::string_view token = word;
  while (!token.empty() && (token.front() == '(' || token.front() == '"' ||
                            token.front() == '\'' || token.front() == '['))
    token.remove_prefix(1);
  if (token.size() == 2 && token[0] >= 'A' && token[0] <= 'Z') return true;
  return std::any_of(kAbbreviations.begin(), kAbbreviations.end(),
                     [&](std::string_view a) { return iequals(a, token); });
}

struct Pass {
  std::string out;
  bool found = false;
};

// One left-to-right removal pass. Ids go to `result`.
Pass remove_markers_once(std::string_view text, std::size_t n_refs,
                         ExtractedCitations& result) {
  Pass pass;
  std::string& out = pass.out;
  out.reserve(text.size());
  bool removed = false;
  bool had_ws = false;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '[') {
      detail::Marker m = detail::match_marker(text, i);
      if (m.length > 0) {
        pass.found = true;
        for (long long id : m.ids) {
          if (id < 1 || static_cast<unsigned long long>(id) > n_refs) {
            ++result.dropped;
            continue;
          }
          int v = static_cast<int>(id);
          if (std::find(result.ids.begin(), result.ids.end(), v) ==
              result.ids.end())
            result.ids.push_back(v);
        }
        while (!out.empty() && is_hspace(out.back())) {
          out.pop_back();
          had_ws = true;
        }
        removed = true;
        i += m.length;
        continue;
      }
    }
    char c = text[i];
    if (removed) {
      if (is_hspace(c) || (out.empty() && is_ws(c))) {
        had_ws = true;
        ++i;
        continue;
      }
      if (had_ws && !out.empty() && !is_ws(out.back()) && !hugs_left(c) &&
          !is_ws(c))
        out.push_back(' ');
      removed = false;
      had_ws = false;
    }
    out.push_back(c);
    ++i;
  }
  if (removed)
    while (!out.empty() && is_ws(out.back())) out.pop_back();
  return pass;
}

std::string render_markers(const CitationIds& ids) {
  std::string s;
  for (int id : ids) s += "[" + std::to_string(id) + "]";
  return s;
}

std::string render_statement(const std::string& clean, const CitationIds& ids) {
  if (ids.empty()) return clean;
  std::string markers = render_markers(ids);
  if (clean.empty()) return markers;
  std::size_t k = clean.size();
  while (k > 0 && is_closing_quote(clean[k - 1])) --k;
  std::size_t p = k;
  while (p > 0 && is_terminal(clean[p - 1])) --p;
  if (p == k) {
    // No terminal punctuation.
    return is_ws(clean.back()) ? clean + markers : clean + " " + markers;
  }
  if (p == 0 || is_ws(clean[p - 1])) return clean + markers;
  return clean.substr(0, p) + " " + markers + clean.substr(p);
}

}  // namespace

namespace detail {

Marker match_marker(std::string_view text, std::size_t pos) {
  Marker m;
  if (pos >= text.size() || text[pos] != '[') return m;
  std::size_t i = pos + 1;
  std::vector<long long> ids;
  for (;;) {
    std::size_t d = i;
    long long value = 0;
    bool overflow = false;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      if (value > 100000000) overflow = true;
      if (!overflow) value = value * 10 + (text[i] - '0');
      ++i;
    }
    if (i == d) return m;
    ids.push_back(overflow ? -1 : value);
    if (i >= text.size()) return m;
    if (text[i] == ']') break;
    if (text[i] != ',') return m;
    ++i;
    while (i < text.size() && text[i] == ' ') ++i;
  }
  m.length = i + 1 - pos;
  m.ids = std::move(ids);
  return m;
}

}  // namespace detail

ExtractedCitations extract_citations(std::string_view text,
                                     std::size_t n_refs) {
  ExtractedCitations result;
  std::string current(text);
  for (;;) {
    Pass pass = remove_markers_once(current, n_refs, result);
    if (!pass.found) break;
    // Removal can splice a new marker together ("[[1]2]"), so repeat.
    current = std::move(pass.out);
  }
  result.clean_text = std::move(current);
  return result;
}

ParsedResponse segment_response(std::string_view text, std::size_t n_refs) {
  ParsedResponse parsed;
  parsed.n_refs = n_refs;
  const std::size_t n = text.size();

  std::size_t start = 0;
  while (start < n && is_ws(text[start])) ++start;
  parsed.leading = std::string(text.substr(0, start));

  auto emit = [&](std::size_t end) {
    std::size_t next = end;
    while (next < n && is_ws(text[next])) ++next;
    Statement st;
    st.index = parsed.statements.size();
    st.raw_span = std::string(text.substr(start, end - start));
    st.trailing = std::string(text.substr(end, next - end));
    ExtractedCitations ex = extract_citations(st.raw_span, n_refs);
    st.clean_text = std::move(ex.clean_text);
    st.citations = std::move(ex.ids);
    parsed.dropped_markers += ex.dropped;
    parsed.statements.push_back(std::move(st));
    start = next;
    return next;
  };

  std::size_t i = start;
  while (i < n) {
    if (text[i] == '[') {
      detail::Marker m = detail::match_marker(text, i);
      if (m.length > 0) {
        i += m.length;
        continue;
      }
    }
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t run_end = i;
    while (run_end < n && is_terminal(text[run_end])) ++run_end;
    std::size_t j = run_end;
    while (j < n && is_closing_quote(text[j])) ++j;

    if (run_end - i == 1 && text[i] == '.' &&
        ends_abbreviation(text, start, i)) {
      i = j;
      continue;
    }

    // The sentence may absorb trailing markers; the boundary is the last
    // candidate end followed by whitespace or end of text.
    constexpr std::size_t kNone = std::string_view::npos;
    std::size_t best = kNone;
    std::size_t e = j;
    if (e == n || is_ws(text[e])) best = e;
    for (;;) {
      std::size_t w = e;
      while (w < n && is_ws(text[w])) ++w;
      detail::Marker m = detail::match_marker(text, w);
      if (m.length == 0) break;
      e = w + m.length;
      if (e == n || is_ws(text[e])) best = e;
    }
    if (best == kNone) {
      i = j;
      continue;
    }
    i = emit(best);
  }
  if (start < n) {
    std::size_t end = n;
    while (end > start && is_ws(text[end - 1])) --end;
    emit(end);
  }
  return parsed;
}

std::string ParsedResponse::reconstruct() const {
  std::string s = leading;
  for (const Statement& st : statements) s += st.raw_span + st.trailing;
  return s;
}

std::string ParsedResponse::clean() const {
  std::string s = leading;
  for (const Statement& st : statements) s += st.clean_text + st.trailing;
  return s;
}

std::string strip_all_citations(std::string_view text) {
  return segment_response(text, 0).clean();
}

std::string rewrite_citations(const ParsedResponse& parsed,
                              const std::vector<CitationIds>& new_ids) {
  if (new_ids.size() != parsed.statements.size())
    throw std::invalid_argument(
        "rewrite_citations: expected " +
        std::to_string(parsed.statements.size()) + " id sets, got " +
        std::to_string(new_ids.size()));
  std::string out = parsed.leading;
  for (std::size_t s = 0; s < parsed.statements.size(); ++s) {
    CitationIds ids;
    for (int id : new_ids[s]) {
      if (id < 1 || static_cast<std::size_t>(id) > parsed.n_refs)
        throw CitationRangeError(s, id);
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    const Statement& st = parsed.statements[s];
    out += render_statement(st.clean_text, ids);
    out += st.trailing;
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (Statement& st : segment_response(text, 0).statements)
    if (!st.clean_text.empty()) out.push_back(std::move(st.clean_text));
  return out;
}

}  // namespace citerefine
