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

#include "citerefine/report.hpp"

#include <cmath>
#include <cstdio>

#include "citerefine/corpus.hpp"

namespace citerefine {

using ordered_json = nlohmann::ordered_json;

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

namespace {

ordered_json family_json(const FamilyScores& f) {
  ordered_json j;
  j["recall"] = f.recall;
  j["precision"] = f.precision;
  j["f1"] = f.f1;
  return j;
}

ordered_json tally_json(const Tally& t) {
  ordered_json j;
  j["statements"] = t.statements;
  j["alce_recall_hits"] = t.alce_recall_hits;
  j["ours_recall_hits"] = t.ours_recall_hits;
  j["excluded_statements"] = t.ours_excluded;
  j["citations"] = t.citations;
  j["alce_relevant"] = t.alce_relevant;
  j["ours_relevant"] = t.ours_relevant;
  j["dropped_markers"] = t.dropped_markers;
  j["empty_statements"] = t.empty_statements;
  j["long_premises"] = t.long_premises;
  j["phi_queries"] = t.phi_queries;
  return j;
}

ordered_json statement_json(const StatementVerdict& v,
                            const MetricOptions& options) {
  ordered_json j;
  j["index"] = v.statement_index;
  j["text"] = v.text;
  j["citations"] = v.citations;
  if (options.alce) j["recall_alce"] = v.recall_alce;
  if (options.ours) {
    if (v.recall_ours == RecallOurs::kExcluded)
      j["recall_ours"] = "excluded";
    else
      j["recall_ours"] = v.recall_ours == RecallOurs::kOne ? 1 : 0;
  }
  ordered_json rel = ordered_json::array();
  for (const CitationVerdict& c : v.relevance) {
    ordered_json cj;
    cj["id"] = c.id;
    if (options.alce) cj["alce"] = c.alce_relevant;
    if (options.ours) cj["ours"] = c.ours_relevant;
    rel.push_back(std::move(cj));
  }
  j["relevance"] = std::move(rel);
  j["phi_queries"] = v.phi_queries;
  return j;
}

}  // namespace

ordered_json report_to_json(const CitationReport& report,
                            const ReportContext& context,
                            const MetricOptions& options) {
  ordered_json j;
  j["format"] = "citerefine-report/1";
  j["backend"] = context.backend_identity;
  j["config"] = context.config;

  ordered_json metrics;
  ordered_json display;
  if (options.alce) {
    metrics["alce"] = family_json(report.alce);
    display["alce_recall"] = format_percent(report.alce.recall);
    display["alce_precision"] = format_percent(report.alce.precision);
    display["alce_f1"] = format_percent(report.alce.f1);
  }
  if (options.ours) {
    metrics["ours"] = family_json(report.ours);
    display["ours_recall"] = format_percent(report.ours.recall);
    display["ours_precision"] = format_percent(report.ours.precision);
    display["ours_f1"] = format_percent(report.ours.f1);
  }
  if (options.bleu) {
    metrics["bleu4"] = report.bleu4 ? ordered_json(*report.bleu4) : ordered_json();
    if (report.bleu4) display["bleu4"] = format_percent(*report.bleu4);
  }
  if (options.rouge) {
    metrics["rouge_l"] =
        report.rouge_l ? ordered_json(*report.rouge_l) : ordered_json();
    if (report.rouge_l) display["rouge_l"] = format_percent(*report.rouge_l);
  }
  j["metrics"] = std::move(metrics);
  j["display"] = std::move(display);

  ordered_json diag;
  diag["samples_evaluated"] = report.samples_evaluated;
  diag["samples_without_response"] = report.samples_without_response;
  diag["samples_with_gold"] = report.samples_with_gold;
  diag["unmatched_predictions"] = report.unmatched_predictions;
  diag["no_citations"] = report.no_citations;
  diag["all_excluded"] = report.all_excluded;
  diag["counts"] = tally_json(report.tally);
  j["diagnostics"] = std::move(diag);

  ordered_json samples = ordered_json::array();
  for (const SampleBreakdown& s : report.samples) {
    ordered_json sj;
    sj["id"] = s.id;
    sj["counts"] = tally_json(s.tally);
    if (s.bleu4) sj["bleu4"] = *s.bleu4;
    if (s.rouge_l) sj["rouge_l"] = *s.rouge_l;
    ordered_json st = ordered_json::array();
    for (const StatementVerdict& v : s.statements)
      st.push_back(statement_json(v, options));
    sj["statements"] = std::move(st);
    samples.push_back(std::move(sj));
  }
  j["samples"] = std::move(samples);
  return j;
}

void write_report(const CitationReport& report, const ReportContext& context,
                  const MetricOptions& options,
                  const std::filesystem::path& path) {
  write_file(path, report_to_json(report, context, options).dump(2) + "\n");
}

}  // namespace citerefine
