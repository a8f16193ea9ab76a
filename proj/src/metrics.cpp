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

#include "citerefine/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "citerefine/errors.hpp"
#include "citerefine/parallel.hpp"
#include "citerefine/similarity.hpp"

namespace citerefine {

const char* to_string(RecallOurs r) {
  switch (r) {
    case RecallOurs::kZero: return "0";
    case RecallOurs::kOne: return "1";
    case RecallOurs::kExcluded: return "excluded";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// StatementScorer

StatementScorer::StatementScorer(std::string statement, CitationIds citations,
                                 const std::vector<std::string>& references,
                                 Entailer& entailer,
                                 std::size_t statement_index)
    : statement_(std::move(statement)),
      ids_(std::move(citations)),
      refs_(references),
      entailer_(entailer),
      index_(statement_index) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  for (int id : ids_)
    if (id < 1 || static_cast<std::size_t>(id) > refs_.size())
      throw CitationRangeError(index_, id);
  if (ids_.size() > 31)
    throw EnumerationCapError(index_, ids_.size(), 31);
}

bool StatementScorer::phi(Mask subset) {
  auto it = memo_.find(subset);
  if (it != memo_.end()) return it->second;
  std::vector<std::string> passages;
  for (std::size_t k = 0; k < ids_.size(); ++k)
    if (subset & (Mask{1} << k)) passages.push_back(refs_[ids_[k] - 1]);
  std::size_t len = 0;
  for (const auto& p : passages) len += p.size();
  len += passages.empty() ? 0 : passages.size() - 1;
  bool v = entailer_.supports(passages, statement_);
  memo_.emplace(subset, v);
  premise_len_.emplace(subset, len);
  return v;
}

bool StatementScorer::phi_all() {
  if (!all_) {
    all_len_ = 0;
    for (const auto& p : refs_) all_len_ += p.size();
    all_len_ += refs_.empty() ? 0 : refs_.size() - 1;
    all_ = entailer_.supports(refs_, statement_);
  }
  return *all_;
}

std::size_t StatementScorer::long_premises(std::size_t limit) const {
  std::size_t n = 0;
  for (const auto& [mask, len] : premise_len_)
    if (len > limit) ++n;
  if (all_ && all_len_ > limit) ++n;
  return n;
}

std::size_t StatementScorer::position(int citation) const {
  auto it = std::find(ids_.begin(), ids_.end(), citation);
  if (it == ids_.end())
    throw std::invalid_argument("citation " + std::to_string(citation) +
                                " is not cited by statement " +
                                std::to_string(index_));
  return static_cast<std::size_t>(it - ids_.begin());
}

int StatementScorer::recall_alce() {
  if (ids_.empty()) return 0;
  const Mask full = (Mask{1} << ids_.size()) - 1;
  return phi(full) ? 1 : 0;
}

RecallOurs StatementScorer::recall_ours() {
  if (ids_.empty())
    return phi_all() ? RecallOurs::kZero : RecallOurs::kExcluded;
  return recall_alce() ? RecallOurs::kOne : RecallOurs::kZero;
}

bool StatementScorer::relevant_alce(int citation) {
  const Mask bit = Mask{1} << position(citation);
  const Mask full = (Mask{1} << ids_.size()) - 1;
  if (!phi(full)) return false;
  if (phi(bit)) return true;
  const Mask rest = full & ~bit;
  // With a single citation the remainder is empty and cannot support.
  return rest == 0 || !phi(rest);
}

bool StatementScorer::relevant_ours(int citation, std::size_t cap) {
  if (ids_.size() > cap) throw EnumerationCapError(index_, ids_.size(), cap);
  const std::size_t pos = position(citation);
  const Mask bit = Mask{1} << pos;
  if (phi(bit)) return true;

  std::vector<std::size_t> others;
  for (std::size_t k = 0; k < ids_.size(); ++k)
    if (k != pos) others.push_back(k);

  // Combinations of `others` by increasing size, lexicographic within a size.
  std::vector<std::size_t> pick;
  for (std::size_t size = 1; size <= others.size(); ++size) {
    pick.resize(size);
    for (std::size_t i = 0; i < size; ++i) pick[i] = i;
    for (;;) {
      Mask sub = 0;
      for (std::size_t i : pick) sub |= Mask{1} << others[i];
      if (!phi(sub) && phi(sub | bit)) return true;
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == others.size() - size + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return false;
}

int statement_recall_alce(const Statement& s,
                          const std::vector<std::string>& refs, Entailer& phi) {
  return StatementScorer(s.clean_text, s.citations, refs, phi, s.index)
      .recall_alce();
}

RecallOurs statement_recall_ours(const Statement& s,
                                 const std::vector<std::string>& refs,
                                 Entailer& phi) {
  return StatementScorer(s.clean_text, s.citations, refs, phi, s.index)
      .recall_ours();
}

bool citation_relevance_alce(int c, const Statement& s,
                             const std::vector<std::string>& refs,
                             Entailer& phi) {
  return StatementScorer(s.clean_text, s.citations, refs, phi, s.index)
      .relevant_alce(c);
}

bool citation_relevance_ours(int c, const Statement& s,
                             const std::vector<std::string>& refs,
                             Entailer& phi, std::size_t cap) {
  return StatementScorer(s.clean_text, s.citations, refs, phi, s.index)
      .relevant_ours(c, cap);
}

double f1(double recall, double precision) {
  if (recall + precision == 0.0) return 0.0;
  return 2.0 * recall * precision / (recall + precision);
}

// ---------------------------------------------------------------------------
// Corpus

Tally& Tally::operator+=(const Tally& o) {
  statements += o.statements;
  alce_recall_hits += o.alce_recall_hits;
  ours_recall_hits += o.ours_recall_hits;
  ours_excluded += o.ours_excluded;
  citations += o.citations;
  alce_relevant += o.alce_relevant;
  ours_relevant += o.ours_relevant;
  dropped_markers += o.dropped_markers;
  empty_statements += o.empty_statements;
  long_premises += o.long_premises;
  phi_queries += o.phi_queries;
  return *this;
}

SampleBreakdown evaluate_response(const Sample& sample,
                                  const std::string& response, Entailer& phi,
                                  const MetricOptions& options) {
  SampleBreakdown out;
  out.id = sample.id;
  const ParsedResponse parsed =
      segment_response(response, sample.references.size());
  out.tally.dropped_markers = parsed.dropped_markers;

  for (const Statement& st : parsed.statements) {
    if (st.clean_text.empty()) {
      // Marker-only fragment: nothing to entail.
      ++out.tally.empty_statements;
      continue;
    }
    StatementScorer scorer(st.clean_text, st.citations, sample.references, phi,
                           st.index);
    StatementVerdict v;
    v.statement_index = st.index;
    v.text = st.clean_text;
    v.citations = scorer.citations();
    if (options.alce || options.ours) v.recall_alce = scorer.recall_alce();
    if (options.ours) v.recall_ours = scorer.recall_ours();
    for (int c : v.citations) {
      CitationVerdict cv{c, false, false};
      if (options.alce) cv.alce_relevant = scorer.relevant_alce(c);
      if (options.ours) cv.ours_relevant = scorer.relevant_ours(c, options.enum_cap);
      v.relevance.push_back(cv);
    }
    v.phi_queries = scorer.queries();

    Tally& t = out.tally;
    ++t.statements;
    t.alce_recall_hits += static_cast<std::size_t>(v.recall_alce);
    if (v.recall_ours == RecallOurs::kOne) ++t.ours_recall_hits;
    if (v.recall_ours == RecallOurs::kExcluded) ++t.ours_excluded;
    t.citations += v.relevance.size();
    for (const CitationVerdict& cv : v.relevance) {
      t.alce_relevant += cv.alce_relevant ? 1 : 0;
      t.ours_relevant += cv.ours_relevant ? 1 : 0;
    }
    t.long_premises += scorer.long_premises(options.premise_warn_chars);
    t.phi_queries += v.phi_queries;
    out.statements.push_back(std::move(v));
  }

  std::vector<std::string> gold = sample.gold_answers();
  if (!gold.empty() && (options.bleu || options.rouge)) {
    for (std::string& g : gold) g = strip_all_citations(g);
    const std::string candidate = strip_all_citations(response);
    if (options.bleu) out.bleu4 = bleu4(candidate, gold);
    if (options.rouge) out.rouge_l = rouge_l(candidate, gold);
  }
  return out;
}

namespace {

double percent(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0
                  : 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

CitationReport aggregate(std::vector<SampleBreakdown> samples,
                         const MetricOptions& options) {
  CitationReport report;
  for (const SampleBreakdown& s : samples) report.tally += s.tally;
  const Tally& t = report.tally;

  report.alce.recall = percent(t.alce_recall_hits, t.statements);
  report.alce.precision = percent(t.alce_relevant, t.citations);
  report.alce.f1 = f1(report.alce.recall, report.alce.precision);
  report.ours.recall = percent(t.ours_recall_hits, t.statements - t.ours_excluded);
  report.ours.precision = percent(t.ours_relevant, t.citations);
  report.ours.f1 = f1(report.ours.recall, report.ours.precision);
  report.no_citations = t.citations == 0;
  report.all_excluded = options.ours && t.statements > 0 &&
                        t.ours_excluded == t.statements;

  double bleu_sum = 0.0, rouge_sum = 0.0;
  std::size_t bleu_n = 0, rouge_n = 0;
  for (const SampleBreakdown& s : samples) {
    if (s.bleu4) bleu_sum += *s.bleu4, ++bleu_n;
    if (s.rouge_l) rouge_sum += *s.rouge_l, ++rouge_n;
  }
  report.samples_with_gold = std::max(bleu_n, rouge_n);
  if (bleu_n > 0) report.bleu4 = 100.0 * bleu_sum / static_cast<double>(bleu_n);
  if (rouge_n > 0)
    report.rouge_l = 100.0 * rouge_sum / static_cast<double>(rouge_n);
  report.samples_evaluated = samples.size();
  report.samples = std::move(samples);
  return report;
}

CitationReport corpus_citation_metrics(
    const Corpus& corpus, const std::map<std::string, std::string>& predictions,
    Entailer& phi, const MetricOptions& options) {
  struct Job {
    const Sample* sample;
    const std::string* response;
  };
  std::vector<Job> jobs;
  std::size_t without_response = 0;
  for (const Sample& s : corpus.samples) {
    const std::string* response = nullptr;
    if (options.use_answers) {
      if (s.answer) response = &*s.answer;
    } else if (auto it = predictions.find(s.id); it != predictions.end()) {
      response = &it->second;
    } else if (s.response) {
      response = &*s.response;
    }
    if (response == nullptr) {
      ++without_response;
      continue;
    }
    jobs.push_back({&s, response});
  }

  std::vector<SampleBreakdown> results(jobs.size());
  parallel_for(jobs.size(), options.workers, [&](std::size_t i) {
    results[i] = evaluate_response(*jobs[i].sample, *jobs[i].response, phi,
                                   options);
  });

  // Corpus-level BLEU replaces the per-sample mean when requested.
  std::optional<double> corpus_bleu;
  if (options.bleu && options.correctness == CorrectnessMode::kCorpus) {
    BleuStats total;
    bool any = false;
    for (const Job& job : jobs) {
      std::vector<std::string> gold = job.sample->gold_answers();
      if (gold.empty()) continue;
      for (std::string& g : gold) g = strip_all_citations(g);
      total += bleu_stats(strip_all_citations(*job.response), gold);
      any = true;
    }
    if (any) corpus_bleu = 100.0 * bleu_from_stats(total);
  }

  CitationReport report = aggregate(std::move(results), options);
  if (corpus_bleu) report.bleu4 = corpus_bleu;
  report.samples_without_response = without_response;
  for (const auto& [id, text] : predictions)
    if (corpus.find(id) == nullptr) report.unmatched_predictions.push_back(id);
  return report;
}

}  // namespace citerefine
