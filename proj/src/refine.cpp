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

#include "citerefine/refine.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <unordered_map>

#include "citerefine/errors.hpp"
#include "citerefine/parallel.hpp"
#include "json.hpp"

namespace citerefine {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

using Mask = std::uint32_t;

// Calls f(mask) for every k-subset of n positions, lexicographic order.
template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  for (;;) {
    Mask m = 0;
    for (std::size_t i : pick) m |= Mask{1} << i;
    f(m);
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
}

CitationIds ids_of(Mask m, const CitationIds& candidates) {
  CitationIds ids;
  for (std::size_t k = 0; k < candidates.size(); ++k)
    if (m & (Mask{1} << k)) ids.push_back(candidates[k]);
  return ids;
}

}  // namespace

GoldResult enumerate_gold(const std::string& statement,
                          const std::vector<std::string>& references,
                          const CitationIds& candidates_in, Entailer& phi,
                          const GoldOptions& options,
                          std::size_t statement_index) {
  CitationIds candidates = candidates_in;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  for (int id : candidates)
    if (id < 1 || static_cast<std::size_t>(id) > references.size())
      throw CitationRangeError(statement_index, id);
  if (candidates.size() > options.cap || candidates.size() > 31)
    throw EnumerationCapError(statement_index, candidates.size(), options.cap);

  GoldResult result;
  const std::size_t n = candidates.size();
  std::unordered_map<Mask, bool> memo;
  auto supports = [&](Mask m) {
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;
    std::vector<std::string> passages;
    for (int id : ids_of(m, candidates)) passages.push_back(references[id - 1]);
    bool v = phi.supports(passages, statement);
    memo.emplace(m, v);
    return v;
  };

  std::vector<Mask> minimal;
  std::vector<Mask> supporting;
  for (std::size_t size = 1; size <= n; ++size) {
    for_each_combination(n, size, [&](Mask m) {
      bool covers_minimal = std::any_of(
          minimal.begin(), minimal.end(),
          [m](Mask found) { return (found & m) == found; });
      if (options.prune && covers_minimal) return;
      if (!supports(m)) return;
      supporting.push_back(m);
      // Smaller subsets were all decided first, so a supporting set that
      // contains no earlier supporting set is minimal.
      bool has_supporting_subset = std::any_of(
          supporting.begin(), supporting.end() - 1,
          [m](Mask s) { return (s & m) == s && s != m; });
      if (!has_supporting_subset) minimal.push_back(m);
    });
  }

  Mask all = 0;
  for (Mask m : minimal) {
    all |= m;
    result.minimal_sets.push_back(ids_of(m, candidates));
  }
  result.ids = ids_of(all, candidates);
  result.phi_queries = memo.size();
  return result;
}

CitationIds gold_citations(const std::string& statement,
                           const std::vector<std::string>& references,
                           Entailer& phi, std::size_t cap) {
  CitationIds all(references.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i + 1);
  GoldOptions options;
  options.cap = cap;
  return enumerate_gold(statement, references, all, phi, options).ids;
}

namespace {

RefinedResponse assemble(const ParsedResponse& parsed,
                         std::vector<CitationIds> after) {
  RefinedResponse out;
  out.original = parsed.reconstruct();
  for (std::size_t i = 0; i < parsed.statements.size(); ++i)
    out.changes.push_back({i, parsed.statements[i].citations, after[i]});
  out.refined = rewrite_citations(parsed, after);
  return out;
}

}  // namespace

RefinedResponse oracle_refine(const ParsedResponse& parsed,
                              const Sample& sample, Entailer& phi,
                              const GoldOptions& options) {
  if (sample.references.empty())
    throw std::invalid_argument("oracle_refine: sample '" + sample.id +
                                "' has no references");
  CitationIds all(sample.references.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i + 1);

  std::vector<CitationIds> after;
  std::size_t queries = 0;
  for (const Statement& st : parsed.statements) {
    if (st.clean_text.empty()) {
      after.emplace_back();
      continue;
    }
    const CitationIds& candidates =
        options.candidates == GoldCandidates::kAllReferences ? all
                                                             : st.citations;
    GoldResult gold = enumerate_gold(st.clean_text, sample.references,
                                     candidates, phi, options, st.index);
    queries += gold.phi_queries;
    after.push_back(std::move(gold.ids));
  }
  RefinedResponse out = assemble(parsed, std::move(after));
  out.phi_queries = queries;
  return out;
}

// ---------------------------------------------------------------------------
// Refiner service

HttpRefiner::HttpRefiner(HttpOptions options) : client_(std::move(options)) {}

std::string HttpRefiner::identity() const {
  return "refiner-http/v1/" + client_.options().endpoint;
}

std::vector<long long> HttpRefiner::refine(
    const std::string& question, const std::vector<std::string>& references,
    const std::string& statement) {
  json req = {{"question", question},
              {"references", references},
              {"statement", statement}};
  std::string body = client_.post("/v1/refine", req.dump());
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("citation_ids") ||
      !j["citation_ids"].is_array())
    throw ProtocolError("malformed /v1/refine reply", body);
  std::vector<long long> ids;
  for (const json& v : j["citation_ids"]) {
    if (!v.is_number_integer())
      throw ProtocolError("non-integer citation id in /v1/refine reply", body);
    ids.push_back(v.get<long long>());
  }
  return ids;
}

ServiceIds service_refine(const std::string& statement, const Sample& sample,
                          Refiner& refiner) {
  ServiceIds out;
  for (long long id :
       refiner.refine(sample.question, sample.references, statement)) {
    if (id < 1 || static_cast<unsigned long long>(id) > sample.references.size()) {
      ++out.dropped;
      continue;
    }
    out.ids.push_back(static_cast<int>(id));
  }
  std::sort(out.ids.begin(), out.ids.end());
  out.ids.erase(std::unique(out.ids.begin(), out.ids.end()), out.ids.end());
  return out;
}

RefinedResponse service_refine_response(const ParsedResponse& parsed,
                                        const Sample& sample,
                                        Refiner& refiner) {
  std::vector<CitationIds> after;
  std::size_t dropped = 0;
  for (const Statement& st : parsed.statements) {
    if (st.clean_text.empty()) {
      after.emplace_back();
      continue;
    }
    ServiceIds ids = service_refine(st.clean_text, sample, refiner);
    dropped += ids.dropped;
    after.push_back(std::move(ids.ids));
  }
  RefinedResponse out = assemble(parsed, std::move(after));
  out.dropped_ids = dropped;
  return out;
}

// ---------------------------------------------------------------------------
// Post-hoc baseline

RefinedResponse posthoc_cite(const ParsedResponse& parsed,
                             const std::vector<std::string>& references,
                             Similarity sim, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("post-hoc threshold must lie in [0, 1]");
  if (parsed.n_refs != references.size())
    throw std::invalid_argument("post-hoc: parsed response and references "
                                "disagree on the reference count");
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(references.size());
  for (const std::string& r : references) sentences.push_back(split_sentences(r));

  std::vector<CitationIds> after;
  for (const Statement& st : parsed.statements) {
    CitationIds ids;
    if (!st.clean_text.empty()) {
      for (std::size_t k = 0; k < references.size(); ++k) {
        double best = 0.0;
        for (const std::string& sentence : sentences[k])
          best = std::max(best, similarity(sim, st.clean_text, sentence));
        if (best > threshold) ids.push_back(static_cast<int>(k + 1));
      }
    }
    after.push_back(std::move(ids));
  }
  return assemble(parsed, std::move(after));
}

// ---------------------------------------------------------------------------
// Training data

RefinerDataset build_refiner_dataset(const Corpus& corpus, Entailer& phi,
                                     const GoldOptions& options,
                                     std::size_t workers) {
  enum class Outcome { kOk, kOverCap, kNoAnswer };
  struct PerSample {
    Outcome outcome = Outcome::kOk;
    std::vector<RefinerRecord> records;
  };
  std::vector<PerSample> per(corpus.samples.size());

  parallel_for(corpus.samples.size(), workers, [&](std::size_t i) {
    const Sample& s = corpus.samples[i];
    PerSample& out = per[i];
    if (!s.answer || s.references.empty()) {
      out.outcome = Outcome::kNoAnswer;
      return;
    }
    CitationIds all(s.references.size());
    for (std::size_t k = 0; k < all.size(); ++k) all[k] = static_cast<int>(k + 1);
    const ParsedResponse parsed = segment_response(*s.answer, s.references.size());
    try {
      for (const Statement& st : parsed.statements) {
        if (st.clean_text.empty()) continue;
        const CitationIds& candidates =
            options.candidates == GoldCandidates::kAllReferences ? all
                                                                 : st.citations;
        GoldResult gold = enumerate_gold(st.clean_text, s.references,
                                         candidates, phi, options, st.index);
        out.records.push_back(
            {s.question, s.references, st.clean_text, std::move(gold.ids)});
      }
    } catch (const EnumerationCapError&) {
      out.outcome = Outcome::kOverCap;
      out.records.clear();
    }
  });

  RefinerDataset dataset;
  for (PerSample& p : per) {
    switch (p.outcome) {
      case Outcome::kOverCap: ++dataset.skipped_over_cap; break;
      case Outcome::kNoAnswer: ++dataset.skipped_without_answer; break;
      case Outcome::kOk:
        for (RefinerRecord& r : p.records) dataset.records.push_back(std::move(r));
        break;
    }
  }
  return dataset;
}

std::string refiner_record_to_json(const RefinerRecord& record) {
  ordered_json j;
  j["question"] = record.question;
  j["references"] = record.references;
  j["statement"] = record.statement;
  j["target_citation_ids"] = record.target_citation_ids;
  return j.dump();
}

}  // namespace citerefine
