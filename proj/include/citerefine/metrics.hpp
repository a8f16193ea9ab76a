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
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "citerefine/corpus.hpp"
#include "citerefine/entail.hpp"
#include "citerefine/segment.hpp"

namespace citerefine {

enum class RecallOurs { kZero, kOne, kExcluded };

const char* to_string(RecallOurs r);

// Scores one statement against its sample's references. Every φ query goes
// through a per-statement memo keyed on the cited subset, so a verdict issues
// each distinct query once; the Entailer's cache dedupes across statements.
class StatementScorer {
 public:
  // `citations` must be in range for `references`; they are scored in
  // ascending id order.
  StatementScorer(std::string statement, CitationIds citations,
                  const std::vector<std::string>& references,
                  Entailer& entailer, std::size_t statement_index = 0);

  const CitationIds& citations() const { return ids_; }

  // 1 iff the statement cites something and the cited passages entail it.
  int recall_alce();
  // Uncited statements the full context cannot support are excluded;
  // otherwise identical to recall_alce().
  RecallOurs recall_ours();

  // ALCE semantics, gated on statement-level support: relevant iff
  // φ(C) && (φ({c}) || !φ(C \ {c})).
  bool relevant_alce(int citation);
  // Relevant iff φ({c}), or some non-empty C' ⊆ C \ {c} with !φ(C') and
  // φ(C' ∪ {c}). Subsets are tried smallest first. Throws
  // EnumerationCapError when |C| > cap.
  bool relevant_ours(int citation, std::size_t cap = 10);

  // Distinct φ queries issued so far.
  std::size_t queries() const { return memo_.size() + (all_.has_value() ? 1 : 0); }
  // Distinct premises longer than `limit` bytes seen so far.
  std::size_t long_premises(std::size_t limit) const;

 private:
  using Mask = std::uint32_t;
  bool phi(Mask subset);
  bool phi_all();
  std::size_t position(int citation) const;

  std::string statement_;
  CitationIds ids_;
  const std::vector<std::string>& refs_;
  Entailer& entailer_;
  std::size_t index_;
  std::unordered_map<Mask, bool> memo_;
  std::unordered_map<Mask, std::size_t> premise_len_;
  std::optional<bool> all_;
  std::size_t all_len_ = 0;
};

// Free-function forms of the per-statement rules.
int statement_recall_alce(const Statement& s,
                          const std::vector<std::string>& refs, Entailer& phi);
RecallOurs statement_recall_ours(const Statement& s,
                                 const std::vector<std::string>& refs,
                                 Entailer& phi);
bool citation_relevance_alce(int c, const Statement& s,
                             const std::vector<std::string>& refs,
                             Entailer& phi);
bool citation_relevance_ours(int c, const Statement& s,
                             const std::vector<std::string>& refs,
                             Entailer& phi, std::size_t cap = 10);

// Harmonic mean of two percentages; 0 when both are 0.
double f1(double recall, double precision);

struct CitationVerdict {
  int id = 0;
  bool alce_relevant = false;
  bool ours_relevant = false;
};

struct StatementVerdict {
  std::size_t statement_index = 0;
  std::string text;
  CitationIds citations;
  int recall_alce = 0;
  RecallOurs recall_ours = RecallOurs::kZero;
  std::vector<CitationVerdict> relevance;
  std::size_t phi_queries = 0;
};

// Numerators and denominators; corpus scores are ratios of their sums.
struct Tally {
  std::size_t statements = 0;
  std::size_t alce_recall_hits = 0;
  std::size_t ours_recall_hits = 0;
  std::size_t ours_excluded = 0;
  std::size_t citations = 0;
  std::size_t alce_relevant = 0;
  std::size_t ours_relevant = 0;
  std::size_t dropped_markers = 0;
  std::size_t empty_statements = 0;
  std::size_t long_premises = 0;
  std::size_t phi_queries = 0;

  Tally& operator+=(const Tally& o);
};

struct SampleBreakdown {
  std::string id;
  std::vector<StatementVerdict> statements;
  Tally tally;
  std::optional<double> bleu4;    // [0, 1]
  std::optional<double> rouge_l;  // [0, 1]
};

struct FamilyScores {
  double recall = 0.0;  // percentages
  double precision = 0.0;
  double f1 = 0.0;
};

enum class CorrectnessMode { kPerSample, kCorpus };

struct MetricOptions {
  bool alce = true;
  bool ours = true;
  bool bleu = true;
  bool rouge = true;
  std::size_t enum_cap = 10;
  std::size_t workers = 1;
  CorrectnessMode correctness = CorrectnessMode::kPerSample;
  // Evaluate the samples' gold `answer` instead of predictions/responses.
  bool use_answers = false;
  // Premises longer than this are counted in diagnostics.
  std::size_t premise_warn_chars = 16384;
};

struct CitationReport {
  FamilyScores alce;
  FamilyScores ours;
  std::optional<double> bleu4;  // percentages
  std::optional<double> rouge_l;
  Tally tally;
  std::size_t samples_evaluated = 0;
  std::size_t samples_without_response = 0;
  std::size_t samples_with_gold = 0;
  std::vector<std::string> unmatched_predictions;
  bool no_citations = false;
  bool all_excluded = false;
  std::vector<SampleBreakdown> samples;
};

CitationReport aggregate(std::vector<SampleBreakdown> samples,
                         const MetricOptions& options);

SampleBreakdown evaluate_response(const Sample& sample,
                                  const std::string& response,
                                  Entailer& phi, const MetricOptions& options);

// Predictions override inline responses; ids absent from the corpus are
// listed in unmatched_predictions and otherwise ignored.
CitationReport corpus_citation_metrics(
    const Corpus& corpus, const std::map<std::string, std::string>& predictions,
    Entailer& phi, const MetricOptions& options = {});

}  // namespace citerefine
