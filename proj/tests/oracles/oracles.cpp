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

#include "oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace oracle {

bool relevant_ours(std::size_t n, std::size_t pos, const Truth& truth) {
  const Mask c = Mask{1} << pos;
  if (truth(c)) return true;
  const Mask universe = (Mask{1} << n) - 1;
  for (Mask sub = 1; sub <= universe; ++sub) {
    if (sub & c) continue;
    if (!truth(sub) && truth(sub | c)) return true;
  }
  return false;
}

bool relevant_alce(std::size_t n, std::size_t pos, const Truth& truth) {
  const Mask universe = (Mask{1} << n) - 1;
  const Mask c = Mask{1} << pos;
  if (!truth(universe)) return false;
  if (truth(c)) return true;
  const Mask rest = universe & ~c;
  bool rest_supports = rest != 0 && truth(rest);
  return !rest_supports;
}

Mask gold_union(std::size_t n, const Truth& truth) {
  const Mask universe = (Mask{1} << n) - 1;
  Mask out = 0;
  for (Mask s = 1; s <= universe && universe != 0; ++s) {
    if (!truth(s)) continue;
    bool minimal = true;
    // Every proper non-empty submask.
    for (Mask t = (s - 1) & s; t != 0; t = (t - 1) & s) {
      if (truth(t)) {
        minimal = false;
        break;
      }
    }
    if (minimal) out |= s;
  }
  return out;
}

std::vector<std::string> tokens(const std::string& text) {
  std::vector<std::string> out;
  std::string word;
  for (unsigned char c : text) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                 c == '\f' || c == '\v';
    bool punct = c < 128 && !space && !(c >= '0' && c <= '9') &&
                 !(c >= 'a' && c <= 'z') && !(c >= 'A' && c <= 'Z') && c > 32 &&
                 c != 127;
    if (space || punct) {
      if (!word.empty()) out.push_back(word);
      word.clear();
      if (punct) out.push_back(std::string(1, static_cast<char>(c)));
    } else {
      if (c >= 'A' && c <= 'Z') c = static_cast<unsigned char>(c - 'A' + 'a');
      word.push_back(static_cast<char>(c));
    }
  }
  if (!word.empty()) out.push_back(word);
  return out;
}

namespace {

std::map<std::string, int> grams(const std::vector<std::string>& t, std::size_t n) {
  std::map<std::string, int> m;
  for (std::size_t i = 0; i + n <= t.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) key += t[i + k] + '\x1f';
    m[key] += 1;
  }
  return m;
}

}  // namespace

double bleu4(const std::string& candidate, const std::vector<std::string>& refs) {
  std::vector<std::string> c = tokens(candidate);
  if (c.empty()) return 0.0;
  double logs = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::string, int> cg = grams(c, n);
    int total = 0, match = 0;
    for (auto& [g, count] : cg) {
      int best = 0;
      for (const std::string& r : refs) {
        auto rg = grams(tokens(r), n);
        if (rg.count(g)) best = std::max(best, rg[g]);
      }
      total += count;
      match += std::min(count, best);
    }
    if (n == 1 && match == 0) return 0.0;
    double p = (n >= 2 && match == 0) ? 1.0 / (total + 1.0)
                                      : static_cast<double>(match) / total;
    logs += std::log(p);
  }
  // Closest reference length; ties go to the shorter.
  long best_len = -1;
  for (const std::string& r : refs) {
    long len = static_cast<long>(tokens(r).size());
    long d = std::labs(len - static_cast<long>(c.size()));
    long bd = std::labs(best_len - static_cast<long>(c.size()));
    if (best_len < 0 || d < bd || (d == bd && len < best_len)) best_len = len;
  }
  double bp = static_cast<long>(c.size()) < best_len
                  ? std::exp(1.0 - static_cast<double>(best_len) / c.size())
                  : 1.0;
  return bp * std::exp(logs / 4.0);
}

namespace {

int lcs(const std::vector<std::string>& a, const std::vector<std::string>& b,
        std::size_t i, std::size_t j, std::map<std::pair<std::size_t, std::size_t>, int>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  int v = a[i] == b[j] ? 1 + lcs(a, b, i + 1, j + 1, memo)
                       : std::max(lcs(a, b, i + 1, j, memo), lcs(a, b, i, j + 1, memo));
  memo[key] = v;
  return v;
}

}  // namespace

double rouge_l(const std::string& candidate, const std::vector<std::string>& refs) {
  std::vector<std::string> c = tokens(candidate);
  double best = 0.0;
  for (const std::string& r : refs) {
    std::vector<std::string> t = tokens(r);
    std::map<std::pair<std::size_t, std::size_t>, int> memo;
    int l = lcs(c, t, 0, 0, memo);
    if (l == 0) continue;
    double p = static_cast<double>(l) / c.size();
    double rec = static_cast<double>(l) / t.size();
    best = std::max(best, 2 * p * rec / (p + rec));
  }
  return best;
}

}  // namespace oracle
