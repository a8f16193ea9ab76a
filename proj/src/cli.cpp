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

#include "citerefine/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "citerefine/corpus.hpp"
#include "citerefine/errors.hpp"
#include "citerefine/parallel.hpp"
#include "citerefine/report.hpp"
#include "citerefine/segment.hpp"

namespace citerefine {

using ordered_json = nlohmann::ordered_json;

namespace {

bool has_metric(const RunConfig& c, const std::string& name) {
  return std::find(c.metrics.begin(), c.metrics.end(), name) != c.metrics.end();
}

HttpOptions http_options(const RunConfig& config) {
  if (config.endpoint.empty())
    throw std::invalid_argument("--endpoint is required for backend '" +
                                config.backend + "'");
  HttpOptions o;
  o.endpoint = config.endpoint;
  o.timeout = std::chrono::milliseconds(config.timeout_ms);
  if (const char* token = std::getenv(kAuthTokenEnv)) o.auth_token = token;
  return o;
}

Corpus load_corpus(const RunConfig& config) {
  if (config.data.empty()) throw std::invalid_argument("--data is required");
  return load_samples(config.data, parse_corpus_format(config.data_format));
}

std::map<std::string, std::string> load_pred_map(const RunConfig& config,
                                                 const Corpus& corpus) {
  if (config.pred.empty()) return {};
  return load_predictions(config.pred, &corpus).responses;
}

void require_out(const RunConfig& config) {
  if (config.out.empty()) throw std::invalid_argument("--out is required");
}

}  // namespace

RunConfig RunConfig::resolved() const {
  RunConfig c = *this;
  if (c.workers == 0)
    c.workers = std::max(1u, std::thread::hardware_concurrency());
  return c;
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["data"] = data;
  j["data_format"] = data_format;
  j["pred"] = pred;
  j["backend"] = backend;
  j["endpoint"] = endpoint;
  j["model"] = model;
  j["table"] = table;
  j["cache"] = cache;
  j["metrics"] = metrics;
  j["mode"] = mode;
  j["sim"] = sim;
  j["threshold"] = threshold;
  j["enum_cap"] = enum_cap;
  j["workers"] = workers;
  j["out"] = out;
  j["changelog"] = changelog;
  j["seed"] = seed;
  j["use_answers"] = use_answers;
  j["correctness"] = correctness;
  j["prune"] = prune;
  j["gold_candidates"] = gold_candidates;
  j["timeout_ms"] = timeout_ms;
  j["premise_warn_chars"] = premise_warn_chars;
  return j;
}

MetricOptions RunConfig::metric_options() const {
  MetricOptions o;
  o.alce = has_metric(*this, "alce");
  o.ours = has_metric(*this, "ours");
  o.bleu = has_metric(*this, "bleu");
  o.rouge = has_metric(*this, "rouge");
  o.enum_cap = enum_cap;
  o.workers = std::max<std::size_t>(1, workers);
  if (correctness == "corpus")
    o.correctness = CorrectnessMode::kCorpus;
  else if (correctness != "per-sample")
    throw std::invalid_argument("unknown correctness mode '" + correctness + "'");
  o.use_answers = use_answers;
  o.premise_warn_chars = premise_warn_chars;
  return o;
}

GoldOptions RunConfig::gold_options() const {
  GoldOptions o;
  o.cap = enum_cap;
  o.prune = prune;
  if (gold_candidates == "cited")
    o.candidates = GoldCandidates::kCitedOnly;
  else if (gold_candidates != "all")
    throw std::invalid_argument("unknown gold candidate set '" +
                                gold_candidates + "'");
  return o;
}

std::unique_ptr<EntailmentBackend> make_backend(const RunConfig& config) {
  if (config.backend == "lexical") return std::make_unique<LexicalBackend>();
  if (config.backend == "table") {
    if (config.table.empty())
      throw std::invalid_argument("--table is required for the table backend");
    return TableBackend::load(config.table);
  }
  if (config.backend == "nli-http")
    return std::make_unique<NliHttpBackend>(http_options(config), config.model);
  if (config.backend == "llm-judge")
    return std::make_unique<LlmJudgeBackend>(
        http_options(config), config.model.empty() ? "gpt-3.5-turbo" : config.model);
  throw std::invalid_argument("unknown backend '" + config.backend + "'");
}

namespace {

std::unique_ptr<EntailmentCache> open_cache(const RunConfig& config) {
  if (config.cache.empty()) return std::make_unique<EntailmentCache>();
  return std::make_unique<EntailmentCache>(config.cache);
}

}  // namespace

CommandStats run_evaluate(const RunConfig& input, std::ostream& log) {
  const RunConfig config = input.resolved();
  require_out(config);
  const MetricOptions options = config.metric_options();
  const Corpus corpus = load_corpus(config);
  const auto predictions = load_pred_map(config, corpus);

  auto backend = make_backend(config);
  auto cache = open_cache(config);
  Entailer phi(*backend, *cache);

  CitationReport report = corpus_citation_metrics(corpus, predictions, phi, options);
  ReportContext context{phi.identity(), config.to_json()};
  write_report(report, context, options, config.out);

  log << "samples " << report.samples_evaluated << "  statements "
      << report.tally.statements << "  citations " << report.tally.citations
      << "\n";
  if (options.alce)
    log << "ALCE  recall " << format_percent(report.alce.recall)
        << "  precision " << format_percent(report.alce.precision) << "  f1 "
        << format_percent(report.alce.f1) << "\n";
  if (options.ours)
    log << "ours  recall " << format_percent(report.ours.recall)
        << "  precision " << format_percent(report.ours.precision) << "  f1 "
        << format_percent(report.ours.f1) << "\n";
  if (report.bleu4) log << "BLEU-4 " << format_percent(*report.bleu4) << "\n";
  if (report.rouge_l) log << "ROUGE-L " << format_percent(*report.rouge_l) << "\n";
  if (report.no_citations) log << "note: no citations in corpus\n";
  log << "backend calls " << backend->calls() << "\n";
  log << "report written to " << config.out << "\n";

  CommandStats stats;
  stats.backend_calls = backend->calls();
  stats.records = report.samples_evaluated;
  return stats;
}

namespace {

std::string change_log_line(const std::string& id, const RefinedResponse& r) {
  ordered_json j;
  j["id"] = id;
  ordered_json changes = ordered_json::array();
  for (const CitationChange& c : r.changes) {
    ordered_json cj;
    cj["index"] = c.index;
    cj["before"] = c.before;
    cj["after"] = c.after;
    changes.push_back(std::move(cj));
  }
  j["statements"] = std::move(changes);
  j["phi_queries"] = r.phi_queries;
  j["dropped_ids"] = r.dropped_ids;
  return j.dump();
}

}  // namespace

CommandStats run_refine(const RunConfig& input, std::ostream& log) {
  const RunConfig config = input.resolved();
  require_out(config);
  if (config.mode != "oracle" && config.mode != "service" &&
      config.mode != "posthoc")
    throw std::invalid_argument("unknown refine mode '" + config.mode + "'");
  if (!(config.threshold >= 0.0 && config.threshold <= 1.0))
    throw std::invalid_argument("--threshold must lie in [0, 1]");
  const Corpus corpus = load_corpus(config);
  const auto predictions = load_pred_map(config, corpus);
  const Similarity sim = parse_similarity(config.sim);
  const GoldOptions gold = config.gold_options();

  std::unique_ptr<EntailmentBackend> backend;
  std::unique_ptr<EntailmentCache> cache;
  std::unique_ptr<Entailer> phi;
  std::unique_ptr<Refiner> refiner;
  if (config.mode == "oracle") {
    backend = make_backend(config);
    cache = open_cache(config);
    phi = std::make_unique<Entailer>(*backend, *cache);
  } else if (config.mode == "service") {
    refiner = std::make_unique<HttpRefiner>(http_options(config));
  }

  struct Job {
    const Sample* sample;
    const std::string* response;
  };
  std::vector<Job> jobs;
  for (const Sample& s : corpus.samples) {
    const std::string* response = nullptr;
    if (auto it = predictions.find(s.id); it != predictions.end())
      response = &it->second;
    else if (s.response)
      response = &*s.response;
    else if (config.use_answers && s.answer)
      response = &*s.answer;
    if (response != nullptr) jobs.push_back({&s, response});
  }

  std::vector<RefinedResponse> results(jobs.size());
  // The service client holds one connection; keep it single-threaded.
  const std::size_t workers = config.mode == "service" ? 1 : config.workers;
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const Sample& s = *jobs[i].sample;
    const ParsedResponse parsed =
        segment_response(*jobs[i].response, s.references.size());
    if (config.mode == "oracle")
      results[i] = oracle_refine(parsed, s, *phi, gold);
    else if (config.mode == "service")
      results[i] = service_refine_response(parsed, s, *refiner);
    else
      results[i] = posthoc_cite(parsed, s.references, sim, config.threshold);
  });

  std::string refined, changes;
  std::size_t changed = 0, dropped = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    ordered_json j;
    j["id"] = jobs[i].sample->id;
    j["response"] = results[i].refined;
    refined += j.dump() + "\n";
    changes += change_log_line(jobs[i].sample->id, results[i]) + "\n";
    for (const CitationChange& c : results[i].changes)
      changed += c.before != c.after ? 1 : 0;
    dropped += results[i].dropped_ids;
  }
  const std::string changelog =
      config.changelog.empty() ? config.out + ".changes.jsonl" : config.changelog;
  write_file(changelog, changes);
  write_file(config.out, refined);

  log << "refined " << jobs.size() << " responses (" << config.mode << "); "
      << changed << " statements changed\n";
  if (dropped > 0)
    log << "warning: refiner returned " << dropped << " out-of-range ids\n";

  CommandStats stats;
  stats.backend_calls = backend ? backend->calls() : 0;
  stats.records = jobs.size();
  return stats;
}

CommandStats run_build_refiner_data(const RunConfig& input, std::ostream& log) {
  const RunConfig config = input.resolved();
  require_out(config);
  const Corpus corpus = load_corpus(config);
  auto backend = make_backend(config);
  auto cache = open_cache(config);
  Entailer phi(*backend, *cache);

  RefinerDataset data =
      build_refiner_dataset(corpus, phi, config.gold_options(), config.workers);
  std::string out;
  for (const RefinerRecord& r : data.records)
    out += refiner_record_to_json(r) + "\n";
  write_file(config.out, out);

  const std::size_t skipped = data.skipped_over_cap + data.skipped_without_answer;
  log << "records " << data.records.size() << "\n"
      << "skipped " << skipped << " (over cap " << data.skipped_over_cap
      << ", without answer " << data.skipped_without_answer << ")\n";

  CommandStats stats;
  stats.backend_calls = backend->calls();
  stats.records = data.records.size();
  stats.skipped = skipped;
  return stats;
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"citerefine: citation quality evaluation and refinement"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; flags take precedence");

  RunConfig c;
  std::string metrics = "alce,ours,bleu,rouge";
  app.add_option("--data", c.data, "samples file");
  app.add_option("--format", c.data_format, "webglm-jsonl | alce-json")
      ->check(CLI::IsMember({"webglm-jsonl", "alce-json"}));
  app.add_option("--pred", c.pred, "predictions JSONL (id, response)");
  app.add_option("--backend", c.backend, "entailment backend")
      ->check(CLI::IsMember({"table", "lexical", "nli-http", "llm-judge"}));
  app.add_option("--endpoint", c.endpoint, "service base URL");
  app.add_option("--model", c.model, "model id for HTTP backends");
  app.add_option("--table", c.table, "JSONL truth table for the table backend");
  app.add_option("--cache", c.cache, "entailment cache file (JSONL)");
  app.add_option("--metrics", metrics, "comma list of alce,ours,bleu,rouge");
  app.add_option("--mode", c.mode, "refine mode")
      ->check(CLI::IsMember({"oracle", "service", "posthoc"}));
  app.add_option("--sim", c.sim, "post-hoc similarity")
      ->check(CLI::IsMember({"bleu", "rouge"}));
  app.add_option("--threshold", c.threshold, "post-hoc threshold (strict)")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--enum-cap", c.enum_cap, "max references to enumerate");
  app.add_option("--workers", c.workers, "worker threads (0: all cores)");
  app.add_option("--out", c.out, "output file");
  app.add_option("--changelog", c.changelog, "refine change log path");
  app.add_option("--seed", c.seed, "seed recorded for synthetic runs");
  app.add_flag("--use-answers", c.use_answers,
               "score/refine the samples' gold answers");
  app.add_option("--correctness", c.correctness, "per-sample | corpus")
      ->check(CLI::IsMember({"per-sample", "corpus"}));
  app.add_option("--prune", c.prune, "skip supersets of minimal sets");
  app.add_option("--gold-candidates", c.gold_candidates, "all | cited")
      ->check(CLI::IsMember({"all", "cited"}));
  app.add_option("--timeout-ms", c.timeout_ms, "HTTP timeout");
  app.add_option("--premise-warn-chars", c.premise_warn_chars,
                 "flag premises longer than this");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score citations");
  CLI::App* refine = app.add_subcommand("refine", "rewrite citations");
  CLI::App* build = app.add_subcommand("build-refiner-data",
                                       "write refiner training records");
  for (CLI::App* sub : {evaluate, refine, build}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    c.metrics.clear();
    std::stringstream ss(metrics);
    for (std::string m; std::getline(ss, m, ',');) {
      if (m.empty()) continue;
      if (m != "alce" && m != "ours" && m != "bleu" && m != "rouge")
        throw std::invalid_argument("unknown metric '" + m + "'");
      c.metrics.push_back(m);
    }
    if (evaluate->parsed())
      run_evaluate(c, out);
    else if (refine->parsed())
      run_refine(c, out);
    else
      run_build_refiner_data(c, out);
  } catch (const std::exception& e) {
    err << "citerefine: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace citerefine
