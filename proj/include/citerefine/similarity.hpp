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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace citerefine {

// Lowercase, split on whitespace, and emit each ASCII punctuation character
// as its own token.
std::vector<std::string> tokenize_for_overlap(std::string_view text);

// Sufficient statistics for BLEU-4 so that corpus-level scores can be
// accumulated over samples.
struct BleuStats {
  std::size_t matches[4] = {0, 0, 0, 0};
  std::size_t totals[4] = {0, 0, 0, 0};
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_stats(std::string_view candidate,
                     std::span<const std::string> references);

// Geometric mean of clipped 1..4-gram precisions times the brevity penalty.
// A zero match count for n >= 2 is smoothed to 1 / (total + 1).
double bleu_from_stats(const BleuStats& stats);

double bleu4(std::string_view candidate,
             std::span<const std::string> references);
double bleu4(std::string_view candidate, std::string_view reference);

// Longest common subsequence of two token sequences.
std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b);

// LCS F-measure (beta = 1). Multiple references: the maximum.
double rouge_l(std::string_view candidate,
               std::span<const std::string> references);
double rouge_l(std::string_view candidate, std::string_view reference);

enum class Similarity { kBleu4, kRougeL };

Similarity parse_similarity(const std::string& name);
const char* to_string(Similarity sim);
double similarity(Similarity sim, std::string_view a, std::string_view b);

}  // namespace citerefine
