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

#include "citerefine/entail.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "citerefine/corpus.hpp"
#include "citerefine/errors.hpp"
#include "httplib.h"
#include "json.hpp"

namespace citerefine {

using json = nlohmann::json;

std::string concat_passages(std::span<const std::string> passages) {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += passages[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Digest

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("sha256: init failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) {
    EVP_DigestUpdate(ctx_, bytes.data(), bytes.size());
  }
  // 8-byte little-endian length, then the bytes.
  void update_framed(std::string_view bytes) {
    std::uint64_t n = bytes.size();
    unsigned char len[8];
    for (int i = 0; i < 8; ++i) len[i] = static_cast<unsigned char>(n >> (8 * i));
    EVP_DigestUpdate(ctx_, len, sizeof len);
    update(bytes);
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx_, md, &n);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (unsigned int i = 0; i < n; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xf]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string cache_key(std::string_view identity, std::string_view premise,
                      std::string_view hypothesis) {
  Sha256 h;
  h.update_framed(identity);
  h.update_framed(premise);
  h.update_framed(hypothesis);
  return h.hex();
}

// ---------------------------------------------------------------------------
// Table and lexical backends

std::unique_ptr<TableBackend> TableBackend::load(
    const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  auto table = std::make_unique<TableBackend>();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(path.string(), lineno, e.what());
    }
    for (const char* field : {"premise", "hypothesis"})
      if (!j.contains(field) || !j[field].is_string())
        throw ParseError(path.string(), lineno,
                         std::string("field '") + field + "' must be a string");
    if (!j.contains("entails") || !j["entails"].is_boolean())
      throw ParseError(path.string(), lineno,
                       "field 'entails' must be a boolean");
    table->set(j["premise"], j["hypothesis"], j["entails"].get<bool>());
  }
  return table;
}

std::string TableBackend::identity() const {
  Sha256 h;
  for (const auto& [key, value] : table_) {
    h.update_framed(key.first);
    h.update_framed(key.second);
    h.update(value ? "1" : "0");
  }
  return "table/v1/" + h.hex().substr(0, 16);
}

bool TableBackend::do_query(const EntailQuery& q) {
  auto it = table_.find({std::string(q.premise), std::string(q.hypothesis)});
  return it != table_.end() && it->second;
}

std::vector<std::string> LexicalBackend::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) tokens.push_back(std::move(cur));
      cur.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

bool LexicalBackend::do_query(const EntailQuery& q) {
  std::vector<std::string> premise = tokenize(q.premise);
  std::set<std::string_view> vocab(premise.begin(), premise.end());
  for (const std::string& tok : tokenize(q.hypothesis)) {
    if (tok.size() >= 4 && !vocab.contains(tok)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// HTTP

struct JsonHttpClient::Impl {
  std::string base;
  std::string prefix;
  std::unique_ptr<httplib::Client> client;
};

JsonHttpClient::JsonHttpClient(HttpOptions options)
    : options_(std::move(options)), impl_(std::make_unique<Impl>()) {
  const std::string& url = options_.endpoint;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("endpoint must look like http://host[:port]: " +
                                url);
  std::size_t path_start = url.find('/', scheme_end + 3);
  impl_->base = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    impl_->prefix = url.substr(path_start);
    while (!impl_->prefix.empty() && impl_->prefix.back() == '/')
      impl_->prefix.pop_back();
  }
  impl_->client = std::make_unique<httplib::Client>(impl_->base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - secs);
  impl_->client->set_connection_timeout(secs.count(), usecs.count());
  impl_->client->set_read_timeout(secs.count(), usecs.count());
  impl_->client->set_write_timeout(secs.count(), usecs.count());
  if (!options_.auth_token.empty())
    impl_->client->set_bearer_token_auth(options_.auth_token);
}

JsonHttpClient::~JsonHttpClient() = default;

std::string JsonHttpClient::post(const std::string& path,
                                 const std::string& body) {
  return request("POST", path, &body);
}

std::string JsonHttpClient::get(const std::string& path) {
  return request("GET", path, nullptr);
}

std::string JsonHttpClient::request(const std::string& method,
                                    const std::string& path,
                                    const std::string* body) {
  const std::string full = impl_->prefix + path;
  std::string last_error;
  auto delay = options_.backoff;
  const int attempts = std::max(1, options_.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Result res =
        body != nullptr
            ? impl_->client->Post(full, *body, "application/json")
            : impl_->client->Get(full);
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + method +
                   " " + full;
      continue;
    }
    return res->body;
  }
  throw BackendUnavailable(options_.endpoint,
                           last_error + " (after " + std::to_string(attempts) +
                               " attempts)");
}

// ---------------------------------------------------------------------------
// NLI service backend

NliHttpBackend::NliHttpBackend(HttpOptions options, std::string model_id)
    : client_(std::move(options)), model_id_(std::move(model_id)) {
  if (!model_id_.empty()) return;
  std::string body = client_.get("/health");
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("model_id") ||
      !j["model_id"].is_string())
    throw ProtocolError("health reply lacks model_id", body);
  model_id_ = j["model_id"].get<std::string>();
}

std::string NliHttpBackend::identity() const {
  return "nli-http/v1/" + client_.options().endpoint + "/" + model_id_;
}

bool NliHttpBackend::do_query(const EntailQuery& q) {
  json req = {{"premise", q.premise}, {"hypothesis", q.hypothesis}};
  std::string body = client_.post("/v1/entail", req.dump());
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("label") ||
      !j["label"].is_string())
    throw ProtocolError("malformed /v1/entail reply", body);
  const std::string label = j["label"].get<std::string>();
  if (label == "entailment") return true;
  if (label == "not_entailment") return false;
  throw ProtocolError("unknown entailment label '" + label + "'", body);
}

// ---------------------------------------------------------------------------
// LLM judge

std::string render_judge_prompt(std::string_view statement,
                                std::span<const std::string> passages) {
  std::string p;
  p += "You check whether a statement from an answer is backed by the "
       "references cited for it.\n\n";
  if (passages.empty()) {
    p += "References: none (the statement cites no references).\n";
  } else {
    p += "References:\n";
    for (std::size_t i = 0; i < passages.size(); ++i) {
      p += "[" + std::to_string(i + 1) + "] ";
      p += passages[i];
      p += "\n";
    }
  }
  p += "\nStatement: ";
  p += statement;
  p += "\n\nReply \"Yes\" if the references above support the statement. "
       "Reply \"No\" otherwise. Answer with exactly one word: Yes or No.";
  return p;
}

bool parse_judge_reply(std::string_view raw) {
  std::size_t i = 0;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
  };
  while (i < raw.size() && !alpha(raw[i])) ++i;
  std::string token;
  while (i < raw.size() && alpha(raw[i]))
    token.push_back(static_cast<char>(std::tolower(raw[i++])));
  if (token == "yes") return true;
  if (token == "no") return false;
  throw ProtocolError("judge reply is neither Yes nor No", std::string(raw));
}

LlmJudgeBackend::LlmJudgeBackend(HttpOptions options, std::string model)
    : client_(std::move(options)), model_(std::move(model)) {}

std::string LlmJudgeBackend::identity() const {
  return std::string("llm-judge/") + kJudgePromptVersion + "/" +
         client_.options().endpoint + "/" + model_;
}

std::string LlmJudgeBackend::ask(const std::string& prompt) {
  json req = {{"model", model_},
              {"temperature", 0},
              {"messages", json::array({{{"role", "user"},
                                         {"content", prompt}}})}};
  std::string body = client_.post("/v1/chat/completions", req.dump());
  json j = json::parse(body, nullptr, false);
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw ProtocolError("malformed chat-completions reply", body);
  }
}

bool LlmJudgeBackend::do_query(const EntailQuery& q) {
  std::vector<std::string> single;
  std::span<const std::string> passages = q.passages;
  if (passages.empty()) {
    single.emplace_back(q.premise);
    passages = single;
  }
  const std::string prompt = render_judge_prompt(q.hypothesis, passages);
  try {
    return parse_judge_reply(ask(prompt));
  } catch (const ProtocolError&) {
    // One retry on an unparseable reply; a second failure propagates.
    return parse_judge_reply(ask(prompt));
  }
}

// ---------------------------------------------------------------------------
// Cache

EntailmentCache::EntailmentCache(std::filesystem::path path)
    : path_(std::move(path)) {
  std::error_code ec;
  std::optional<std::uintmax_t> torn_at;
  bool needs_newline = false;
  if (std::filesystem::exists(path_, ec)) {
    const std::string bytes = read_file(path_);
    std::size_t pos = 0, lineno = 0;
    while (pos < bytes.size()) {
      std::size_t nl = bytes.find('\n', pos);
      const bool last = nl == std::string::npos || nl + 1 == bytes.size();
      std::string_view line(bytes.data() + pos,
                            (nl == std::string::npos ? bytes.size() : nl) - pos);
      ++lineno;
      if (!line.empty()) {
        json j = json::parse(line, nullptr, false);
        bool ok = !j.is_discarded() && j.is_object() && j.contains("k") &&
                  j["k"].is_string() && j.contains("v") && j["v"].is_boolean();
        if (!ok) {
          // An interrupted append leaves at most one partial line at the end.
          if (!last) throw ParseError(path_.string(), lineno, "corrupt cache entry");
          torn_at = pos;
          break;
        }
        entries_[j["k"].get<std::string>()] = j["v"].get<bool>();
      }
      if (nl == std::string::npos) {
        needs_newline = true;
        break;
      }
      pos = nl + 1;
    }
    if (torn_at) {
      std::filesystem::resize_file(path_, *torn_at, ec);
      if (ec) throw IoError("cannot truncate cache file " + path_.string());
    }
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  if (!out_) throw IoError("cannot open cache file " + path_.string());
  if (needs_newline) out_ << '\n' << std::flush;
}

EntailmentCache::~EntailmentCache() = default;

std::optional<bool> EntailmentCache::lookup(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EntailmentCache::insert(const std::string& key, bool value) {
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.emplace(key, value);
  if (!inserted) return;
  if (out_.is_open()) {
    out_ << "{\"k\":\"" << key << "\",\"v\":" << (value ? "true" : "false")
         << "}\n"
         << std::flush;
    if (!out_) throw IoError("cannot append to cache file " + path_.string());
  }
}

std::size_t EntailmentCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// ---------------------------------------------------------------------------
// Entailer

bool Entailer::lookup_or_query(const EntailQuery& q) {
  if (q.premise.empty() || q.hypothesis.empty())
    throw std::invalid_argument("entailment premise and hypothesis must be "
                                "non-empty");
  lookups_.fetch_add(1, std::memory_order_relaxed);
  const std::string key = cache_key(identity_, q.premise, q.hypothesis);
  if (auto hit = cache_.lookup(key)) return *hit;
  misses_.fetch_add(1, std::memory_order_relaxed);
  bool value = backend_.query(q);
  cache_.insert(key, value);
  return value;
}

bool Entailer::entails(std::string_view premise, std::string_view hypothesis) {
  return lookup_or_query({{}, premise, hypothesis});
}

bool Entailer::supports(std::span<const std::string> passages,
                        std::string_view hypothesis) {
  const std::string premise = concat_passages(passages);
  return lookup_or_query({passages, premise, hypothesis});
}

bool entails(EntailmentBackend& backend, EntailmentCache& cache,
             std::string_view premise, std::string_view hypothesis) {
  Entailer e(backend, cache);
  return e.entails(premise, hypothesis);
}

}  // namespace citerefine
