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

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "citerefine/entail.hpp"
#include "citerefine/metrics.hpp"
#include "citerefine/refine.hpp"
#include "json.hpp"

namespace citerefine {

// Fully resolved options of one invocation. Serialized verbatim into every
// report; the auth token is never part of it.
struct RunConfig {
  std::string data;
  std::string data_format = "webglm-jsonl";
  std::string pred;
  std::string backend = "lexical";  // table | lexical | nli-http | llm-judge
  std::string endpoint;
  std::string model;
  std::string table;
  std::string cache;
  std::vector<std::string> metrics = {"alce", "ours", "bleu", "rouge"};
  std::string mode = "oracle";  // oracle | service | posthoc
  std::string sim = "rouge";
  double threshold = 0.3;
  std::size_t enum_cap = 10;
  std::size_t workers = 0;  // 0: logical cores
  std::string out;
  std::string changelog;
  std::uint64_t seed = 0;
  bool use_answers = false;
  std::string correctness = "per-sample";  // per-sample | corpus
  bool prune = true;
  std::string gold_candidates = "all";  // all | cited
  std::size_t timeout_ms = 30000;
  std::size_t premise_warn_chars = 16384;

  // Replaces workers == 0 with the core count.
  RunConfig resolved() const;
  nlohmann::ordered_json to_json() const;
  MetricOptions metric_options() const;
  GoldOptions gold_options() const;
};

// Builds the entailment backend named by config.backend. The auth token for
// HTTP backends comes from the environment (kAuthTokenEnv).
std::unique_ptr<EntailmentBackend> make_backend(const RunConfig& config);

struct CommandStats {
  std::uint64_t backend_calls = 0;
  std::size_t records = 0;
  std::size_t skipped = 0;
};

// Each command throws citerefine::Error (or std::exception) on failure; the
// output file exists only if the command returned.
CommandStats run_evaluate(const RunConfig& config, std::ostream& log);
CommandStats run_refine(const RunConfig& config, std::ostream& log);
CommandStats run_build_refiner_data(const RunConfig& config, std::ostream& log);

// Entry point of the `citerefine` binary: parses flags (and an optional
// --config TOML file), dispatches, maps failures to a nonzero exit.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace citerefine
