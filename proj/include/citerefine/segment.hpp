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

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace citerefine {

// Ordered set of 1-based reference ids: no duplicates, insertion order kept.
using CitationIds = std::vector<int>;

// Marker grammar: '[' digits ']' or '[' digits (',' ' '* digits)* ']'.
// Ids are 1-based indices into the sample's references.

struct Statement {
  std::size_t index = 0;
  // Text with markers removed and whitespace collapsed at removal points.
  std::string clean_text;
  // The original substring, markers included.
  std::string raw_span;
  // Whitespace between this span and the next one (or end of text).
  std::string trailing;
  CitationIds citations;
};

struct ParsedResponse {
  // Whitespace before the first statement.
  std::string leading;
  std::vector<Statement> statements;
  std::size_t dropped_markers = 0;
  std::size_t n_refs = 0;

  // leading + raw_span/trailing pairs; equals the parsed text.
  std::string reconstruct() const;
  // leading + clean_text/trailing pairs.
  std::string clean() const;
};

struct ExtractedCitations {
  std::string clean_text;
  CitationIds ids;
  std::size_t dropped = 0;
};

// Splits `text` into sentences and parses their citation markers. Markers
// between a sentence's terminal punctuation and the next sentence attach to
// the earlier one. Out-of-range ids are dropped and counted.
ParsedResponse segment_response(std::string_view text, std::size_t n_refs);

// Removes every marker from `text`, returning in-range ids in first-occurrence
// order. Repeats until no marker substring remains.
ExtractedCitations extract_citations(std::string_view text, std::size_t n_refs);

std::string strip_all_citations(std::string_view text);

// Renders `new_ids[i]` onto statement i as consecutive [k] tokens placed
// before the terminal punctuation. Throws CitationRangeError for ids outside
// [1, parsed.n_refs] and std::invalid_argument on a size mismatch.
std::string rewrite_citations(const ParsedResponse& parsed,
                              const std::vector<CitationIds>& new_ids);

// Sentence texts of a passage (markers stripped), used for post-hoc matching.
std::vector<std::string> split_sentences(std::string_view text);

namespace detail {

struct Marker {
  std::size_t length = 0;
  // Raw ids as written, including out-of-range ones; -1 marks overflow.
  std::vector<long long> ids;
};

// Returns a marker starting exactly at `pos`, or length 0 if none.
Marker match_marker(std::string_view text, std::size_t pos);

}  // namespace detail

}  // namespace citerefine
