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

#include <array>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace citerefine {

// A single entailment question. `passages` is the cited evidence in ascending
// reference order; `premise` is always concat_passages(passages) when
// passages are given. Backends that number their evidence (the LLM judge)
// read `passages`; the rest read `premise`.
struct EntailQuery {
  std::span<const std::string> passages;
  std::string_view premise;
  std::string_view hypothesis;
};

// Passages joined with a single '\n'. Callers pass them in ascending
// reference-id order.
std::string concat_passages(std::span<const std::string> passages);

class EntailmentBackend {
 public:
  virtual ~EntailmentBackend() = default;

  // Stable name of kind + model/endpoint + prompt version. Two backends with
  // equal identity must answer every query identically.
  virtual std::string identity() const = 0;
  virtual const char* kind() const = 0;

  // Uncached call. Counts toward calls().
  bool query(const EntailQuery& q) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return do_query(q);
  }

  std::uint64_t calls() const { return calls_.load(); }

 protected:
  virtual bool do_query(const EntailQuery& q) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

// Lookup table keyed on (premise, hypothesis). Unknown pairs are false.
class TableBackend : public EntailmentBackend {
 public:
  TableBackend() = default;
  explicit TableBackend(std::map<std::pair<std::string, std::string>, bool> t)
      : table_(std::move(t)) {}

  void set(std::string premise, std::string hypothesis, bool value) {
    table_[{std::move(premise), std::move(hypothesis)}] = value;
  }
  std::size_t size() const { return table_.size(); }
  const std::map<std::pair<std::string, std::string>, bool>& entries() const {
    return table_;
  }

  // JSONL: {"premise": s, "hypothesis": s, "entails": bool} per line.
  static std::unique_ptr<TableBackend> load(const std::filesystem::path& path);

  std::string identity() const override;
  const char* kind() const override { return "table"; }

 protected:
  bool do_query(const EntailQuery& q) override;

 private:
  std::map<std::pair<std::string, std::string>, bool> table_;
};

// Offline stand-in: lowercase, strip punctuation, split on whitespace; true
// iff every hypothesis token of 4+ bytes occurs among the premise tokens.
class LexicalBackend : public EntailmentBackend {
 public:
  std::string identity() const override { return "lexical/v1/min-len=4"; }
  const char* kind() const override { return "lexical"; }

  static std::vector<std::string> tokenize(std::string_view text);

 protected:
  bool do_query(const EntailQuery& q) override;
};

struct HttpOptions {
  // scheme://host[:port][/prefix]
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  int attempts = 3;
  std::chrono::milliseconds backoff{200};
  // Bearer token; read from kAuthTokenEnv by the CLI.
  std::string auth_token;
};

inline constexpr const char* kAuthTokenEnv = "CITEREFINE_API_TOKEN";

// Minimal JSON-over-HTTP client with retry on transport errors. A non-200
// status counts as a transport error.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpOptions options);
  ~JsonHttpClient();
  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  // Returns the response body. Throws BackendUnavailable once the attempt
  // budget is spent.
  std::string post(const std::string& path, const std::string& body);
  std::string get(const std::string& path);

  const HttpOptions& options() const { return options_; }

 private:
  struct Impl;
  std::string request(const std::string& method, const std::string& path,
                      const std::string* body);
  HttpOptions options_;
  std::unique_ptr<Impl> impl_;
};

// Client of the `/v1/entail` protocol. When `model_id` is empty the
// constructor asks `/health` for it, so an unreachable service fails early.
class NliHttpBackend : public EntailmentBackend {
 public:
  NliHttpBackend(HttpOptions options, std::string model_id = {});

  std::string identity() const override;
  const char* kind() const override { return "nli-http"; }
  const std::string& model_id() const { return model_id_; }

 protected:
  bool do_query(const EntailQuery& q) override;

 private:
  JsonHttpClient client_;
  std::string model_id_;
};

inline constexpr const char* kJudgePromptVersion = "judge-v1";

std::string render_judge_prompt(std::string_view statement,
                                std::span<const std::string> passages);

// First alphabetic token, case-insensitive: "yes" -> true, "no" -> false.
// Anything else throws ProtocolError carrying `raw`.
bool parse_judge_reply(std::string_view raw);

// OpenAI-compatible chat-completions judge at temperature 0.
class LlmJudgeBackend : public EntailmentBackend {
 public:
  LlmJudgeBackend(HttpOptions options, std::string model);

  std::string identity() const override;
  const char* kind() const override { return "llm-judge"; }

 protected:
  bool do_query(const EntailQuery& q) override;

 private:
  std::string ask(const std::string& prompt);
  JsonHttpClient client_;
  std::string model_;
};

// SHA-256 over length-prefixed identity, premise and hypothesis.
std::string cache_key(std::string_view identity, std::string_view premise,
                      std::string_view hypothesis);

// Persistent verdict cache. Lines are {"k": hex digest, "v": bool}; a torn
// final line (crash mid-append) is ignored on load. Lookups may run
// concurrently; appends are serialized and flushed one line at a time.
class EntailmentCache {
 public:
  // In-memory only.
  EntailmentCache() = default;
  explicit EntailmentCache(std::filesystem::path path);
  ~EntailmentCache();

  std::optional<bool> lookup(const std::string& key) const;
  void insert(const std::string& key, bool value);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, bool> entries_;
  std::ofstream out_;
};

// A backend plus its cache: the φ used by metrics and refinement.
class Entailer {
 public:
  Entailer(EntailmentBackend& backend, EntailmentCache& cache)
      : backend_(backend), cache_(cache), identity_(backend.identity()) {}

  // Throws std::invalid_argument on empty premise or hypothesis.
  bool entails(std::string_view premise, std::string_view hypothesis);
  // Premise is concat_passages(passages).
  bool supports(std::span<const std::string> passages,
                std::string_view hypothesis);

  EntailmentBackend& backend() { return backend_; }
  const std::string& identity() const { return identity_; }

  std::uint64_t lookups() const { return lookups_.load(); }
  std::uint64_t misses() const { return misses_.load(); }

 private:
  bool lookup_or_query(const EntailQuery& q);

  EntailmentBackend& backend_;
  EntailmentCache& cache_;
  std::string identity_;
  std::atomic<std::uint64_t> lookups_{0};
  std::atomic<std::uint64_t> misses_{0};
};

// Convenience matching the free-function form: one cached φ call.
bool entails(EntailmentBackend& backend, EntailmentCache& cache,
             std::string_view premise, std::string_view hypothesis);

}  // namespace citerefine
