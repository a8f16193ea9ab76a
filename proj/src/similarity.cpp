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

#include "citerefine/similarity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

namespace citerefine {
namespace {

using NgramCounts = std::map<std::vector<std::string_view>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string_view> gram(tokens.begin() + i,
                                       tokens.begin() + i + n);
    ++counts[std::move(gram)];
  }
  return counts;
}

}  // namespace

std::vector<std::string> tokenize_for_overlap(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return tokens;
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (int n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  return *this;
}

BleuStats bleu_stats(std::string_view candidate,
                     std::span<const std::string> references) {
  BleuStats stats;
  const std::vector<std::string> cand = tokenize_for_overlap(candidate);
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const std::string& r : references)
    refs.push_back(tokenize_for_overlap(r));

  stats.candidate_length = cand.size();
  // Closest reference length, shorter wins ties.
  std::size_t best = 0;
  bool have = false;
  for (const auto& r : refs) {
    auto dist = [&](std::size_t len) {
      return len > cand.size() ? len - cand.size() : cand.size() - len;
    };
    if (!have || dist(r.size()) < dist(best) ||
        (dist(r.size()) == dist(best) && r.size() < best)) {
      best = r.size();
      have = true;
    }
  }
  stats.reference_length = best;

  for (std::size_t n = 1; n <= 4; ++n) {
    NgramCounts cand_counts = count_ngrams(cand, n);
    NgramCounts max_ref;
    for (const auto& r : refs)
      for (auto& [gram, count] : count_ngrams(r, n)) {
        std::size_t& slot = max_ref[gram];
        slot = std::max(slot, count);
      }
    for (const auto& [gram, count] : cand_counts) {
      stats.totals[n - 1] += count;
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) stats.matches[n - 1] += std::min(count, it->second);
    }
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  if (stats.candidate_length == 0 || stats.matches[0] == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 4; ++n) {
    double num = static_cast<double>(stats.matches[n]);
    double den = static_cast<double>(stats.totals[n]);
    if (n > 0 && stats.matches[n] == 0) {
      num = 1.0;
      den += 1.0;
    }
    log_sum += std::log(num / den);
  }
  double bp = 1.0;
  if (stats.candidate_length < stats.reference_length)
    bp = std::exp(1.0 - static_cast<double>(stats.reference_length) /
                            static_cast<double>(stats.candidate_length));
  return bp * std::exp(log_sum / 4.0);
}

double bleu4(std::string_view candidate,
             std::span<const std::string> references) {
  return bleu_from_stats(bleu_stats(candidate, references));
}

double bleu4(std::string_view candidate, std::string_view reference) {
  const std::string ref(reference);
  return bleu4(candidate, std::span<const std::string>(&ref, 1));
}

std::size_t lcs_length(std::span<const std::string> a,
                       std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::string_view candidate,
               std::span<const std::string> references) {
  const std::vector<std::string> cand = tokenize_for_overlap(candidate);
  double best = 0.0;
  for (const std::string& r : references) {
    const std::vector<std::string> ref = tokenize_for_overlap(r);
    const std::size_t lcs = lcs_length(cand, ref);
    if (lcs == 0) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
    const double rec = static_cast<double>(lcs) / static_cast<double>(ref.size());
    best = std::max(best, 2.0 * p * rec / (p + rec));
  }
  return best;
}

double rouge_l(std::string_view candidate, std::string_view reference) {
  const std::string ref(reference);
  return rouge_l(candidate, std::span<const std::string>(&ref, 1));
}

Similarity parse_similarity(const std::string& name) {
  if (name == "bleu" || name == "bleu4") return Similarity::kBleu4;
  if (name == "rouge" || name == "rouge_l" || name == "rouge-l")
    return Similarity::kRougeL;
  throw std::invalid_argument("unknown similarity '" + name +
                              "' (expected bleu or rouge)");
}

const char* to_string(Similarity sim) {
  return sim == Similarity::kBleu4 ? "bleu" : "rouge";
}

double similarity(Similarity sim, std::string_view a, std::string_view b) {
  return sim == Similarity::kBleu4 ? bleu4(a, b) : rouge_l(a, b);
}

}  // namespace citerefine
