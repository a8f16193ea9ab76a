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
#include <memory>
#include <string>
#include <vector>

#include "citerefine/corpus.hpp"
#include "citerefine/entail.hpp"
#include "citerefine/segment.hpp"
#include "citerefine/similarity.hpp"

namespace citerefine {

struct RefinerRecord {
  std::string question;
  std::vector<std::string> references;
  std::string statement;
  CitationIds target_citation_ids;

  bool operator==(const RefinerRecord&) const = default;
};

struct CitationChange {
  std::size_t index = 0;
  CitationIds before;
  CitationIds after;
};

struct RefinedResponse {
  std::string original;
  std::string refined;
  std::vector<CitationChange> changes;  // one per statement
  std::size_t phi_queries = 0;
  // Ids a refiner service returned outside [1, n_refs].
  std::size_t dropped_ids = 0;
};

// Which reference ids gold enumeration may choose from.
enum class GoldCandidates { kAllReferences, kCitedOnly };

struct GoldOptions {
  std::size_t cap = 10;
  // Skip supersets of minimal supporting sets already found.
  bool prune = true;
  GoldCandidates candidates = GoldCandidates::kAllReferences;
};

struct GoldResult {
  CitationIds ids;  // ascending union of the minimal supporting sets
  std::vector<CitationIds> minimal_sets;
  std::size_t phi_queries = 0;
};

// Enumerates non-empty subsets of `candidates` (1-based ids) smallest first
// and collects the inclusion-minimal ones that entail `statement`. Throws
// EnumerationCapError when there are more than options.cap candidates.
GoldResult enumerate_gold(const std::string& statement,
                          const std::vector<std::string>& references,
                          const CitationIds& candidates, Entailer& phi,
                          const GoldOptions& options = {},
                          std::size_t statement_index = 0);

// Union of minimal supporting subsets over all references.
CitationIds gold_citations(const std::string& statement,
                           const std::vector<std::string>& references,
                           Entailer& phi, std::size_t cap = 10);

// Sets every statement's citations to its gold set. Text is unchanged.
RefinedResponse oracle_refine(const ParsedResponse& parsed,
                              const Sample& sample, Entailer& phi,
                              const GoldOptions& options = {});

// Anything that maps (question, references, statement) to citation ids.
class Refiner {
 public:
  virtual ~Refiner() = default;
  virtual std::vector<long long> refine(const std::string& question,
                                        const std::vector<std::string>& references,
                                        const std::string& statement) = 0;
  virtual std::string identity() const = 0;
};

// Client of the `/v1/refine` protocol.
class HttpRefiner : public Refiner {
 public:
  explicit HttpRefiner(HttpOptions options);
  std::vector<long long> refine(const std::string& question,
                                const std::vector<std::string>& references,
                                const std::string& statement) override;
  std::string identity() const override;

 private:
  JsonHttpClient client_;
};

struct ServiceIds {
  CitationIds ids;  // ascending, deduplicated, in range
  std::size_t dropped = 0;
};

ServiceIds service_refine(const std::string& statement, const Sample& sample,
                          Refiner& refiner);

RefinedResponse service_refine_response(const ParsedResponse& parsed,
                                        const Sample& sample, Refiner& refiner);

// Rule-based baseline: cite reference k iff the best similarity between the
// statement and any sentence of reference k is strictly above `threshold`.
RefinedResponse posthoc_cite(const ParsedResponse& parsed,
                             const std::vector<std::string>& references,
                             Similarity sim, double threshold = 0.3);

struct RefinerDataset {
  std::vector<RefinerRecord> records;
  std::size_t skipped_over_cap = 0;
  std::size_t skipped_without_answer = 0;
};

RefinerDataset build_refiner_dataset(const Corpus& corpus, Entailer& phi,
                                     const GoldOptions& options = {},
                                     std::size_t workers = 1);

std::string refiner_record_to_json(const RefinerRecord& record);

}  // namespace citerefine
