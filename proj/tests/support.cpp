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

#include "support.hpp"

#include <algorithm>
#include <atomic>

#include <unistd.h>

#include "httplib.h"
#include "citerefine/corpus.hpp"
#include "json.hpp"

namespace testing {

std::vector<std::string> make_refs(std::size_t n, const std::string& tag) {
  std::vector<std::string> refs;
  for (std::size_t k = 0; k < n; ++k)
    refs.push_back("passage-" + tag + "-" + std::to_string(k + 1) +
                   " describes topic " + std::to_string(k + 1) + ".");
  return refs;
}

CitationIds ids_of(Mask m, const CitationIds& ids) {
  CitationIds out;
  for (std::size_t k = 0; k < ids.size(); ++k)
    if (m & (Mask{1} << k)) out.push_back(ids[k]);
  return out;
}

void add_truth(citerefine::TableBackend& table,
               const std::vector<std::string>& refs, const CitationIds& ids,
               const std::string& statement, const Truth& truth) {
  const Mask universe = (Mask{1} << ids.size()) - 1;
  for (Mask m = 1; m <= universe && universe != 0; ++m) {
    std::vector<std::string> passages;
    for (int id : ids_of(m, ids)) passages.push_back(refs[id - 1]);
    table.set(citerefine::concat_passages(passages), statement, truth(m));
  }
}

RandomTruth random_truth(std::size_t n, std::mt19937_64& rng, double p) {
  std::bernoulli_distribution coin(p);
  RandomTruth t;
  t.bits.resize(std::size_t{1} << n);
  for (std::size_t m = 1; m < t.bits.size(); ++m) t.bits[m] = coin(rng);
  return t;
}

bool MonotoneTruth::operator()(Mask m) const {
  return std::any_of(minimal.begin(), minimal.end(),
                     [m](Mask s) { return (s & m) == s; });
}

MonotoneTruth random_monotone_truth(std::size_t n, std::mt19937_64& rng,
                                    bool nonempty) {
  MonotoneTruth t;
  if (n == 0) return t;
  std::uniform_int_distribution<Mask> pick(1, (Mask{1} << n) - 1);
  std::uniform_int_distribution<int> count(nonempty ? 1 : 0, 3);
  int k = count(rng);
  for (int i = 0; i < k; ++i) {
    Mask s = pick(rng);
    bool dominated = std::any_of(t.minimal.begin(), t.minimal.end(),
                                 [s](Mask x) { return (x & s) == x; });
    if (dominated) continue;
    std::erase_if(t.minimal, [s](Mask x) { return (s & x) == s; });
    t.minimal.push_back(s);
  }
  return t;
}

namespace {

const char* kWords[] = {"cats",   "purr",  "water", "boils", "at",
                        "100C",   "the",   "sky",   "is",    "blue",
                        "Dr.",    "e.g.",  "J.",    "3.5",   "etc.",
                        "vs.",    "naïve", "日本",  "😀",    "(yes)",
                        "\"hi\"", "[",     "]",     "[x]",   "a,b"};

std::string random_marker(std::mt19937_64& rng, std::size_t max_refs) {
  std::uniform_int_distribution<int> id(0, static_cast<int>(max_refs) + 2);
  std::uniform_int_distribution<int> len(1, 3);
  std::bernoulli_distribution comma(0.3);
  std::string m = "[";
  int k = comma(rng) ? len(rng) : 1;
  for (int i = 0; i < k; ++i) {
    if (i > 0) m += comma(rng) ? ", " : ",";
    m += std::to_string(id(rng));
  }
  return m + "]";
}

}  // namespace

std::string fuzz_response(std::mt19937_64& rng, std::size_t max_refs) {
  std::uniform_int_distribution<int> pieces(0, 40);
  std::uniform_int_distribution<int> kind(0, 11);
  std::uniform_int_distribution<std::size_t> word(0, std::size(kWords) - 1);
  std::string s;
  int n = pieces(rng);
  for (int i = 0; i < n; ++i) {
    switch (kind(rng)) {
      case 0: case 1: case 2: case 3: s += kWords[word(rng)]; break;
      case 4: s += " "; break;
      case 5: s += random_marker(rng, max_refs); break;
      case 6: s += ". "; break;
      case 7: s += "?"; break;
      case 8: s += "!"; break;
      case 9: s += "\n"; break;
      case 10: s += "  \t"; break;
      default: s += "."; break;
    }
  }
  return s;
}

std::string well_formed_response(std::mt19937_64& rng, std::size_t n_statements,
                                 std::size_t n_refs) {
  std::uniform_int_distribution<int> words(2, 6);
  std::uniform_int_distribution<std::size_t> word(0, 9);
  std::uniform_int_distribution<int> cites(0, 2);
  std::uniform_int_distribution<int> id(1, static_cast<int>(std::max<std::size_t>(1, n_refs)));
  std::string s;
  for (std::size_t st = 0; st < n_statements; ++st) {
    if (st > 0) s += " ";
    int w = words(rng);
    for (int i = 0; i < w; ++i) {
      if (i > 0) s += " ";
      s += kWords[word(rng)];
    }
    int c = n_refs == 0 ? 0 : cites(rng);
    for (int i = 0; i < c; ++i) s += (i == 0 ? " [" : "[") + std::to_string(id(rng)) + "]";
    s += ".";
  }
  return s;
}

SyntheticCorpus synthetic_corpus(
    std::mt19937_64& rng, const SyntheticShape& shape,
    const std::function<Truth(std::size_t)>& truth_for) {
  SyntheticCorpus out;
  std::uniform_int_distribution<std::size_t> n_samples(1, shape.max_samples);
  std::uniform_int_distribution<std::size_t> n_statements(1, shape.max_statements);
  std::uniform_int_distribution<std::size_t> n_refs(1, shape.max_refs);
  const std::size_t samples = n_samples(rng);
  for (std::size_t i = 0; i < samples; ++i) {
    citerefine::Sample sample;
    sample.id = "syn-" + std::to_string(i);
    sample.question = "Question " + std::to_string(i) + "?";
    sample.references = make_refs(n_refs(rng), sample.id);
    const std::size_t n = sample.references.size();
    CitationIds all;
    for (std::size_t k = 1; k <= n; ++k) all.push_back(static_cast<int>(k));

    std::uniform_int_distribution<std::size_t> n_cites(0, std::min(n, shape.max_citations));
    std::string response;
    const std::size_t statements = n_statements(rng);
    for (std::size_t j = 0; j < statements; ++j) {
      const std::string text =
          "Claim " + std::to_string(j) + " of sample " + std::to_string(i) + ".";
      CitationIds cited = all;
      std::shuffle(cited.begin(), cited.end(), rng);
      cited.resize(n_cites(rng));
      std::sort(cited.begin(), cited.end());
      std::string raw = text.substr(0, text.size() - 1);
      if (!cited.empty()) raw += " ";
      for (int c : cited) raw += "[" + std::to_string(c) + "]";
      if (j > 0) response += " ";
      response += raw + ".";
      add_truth(*out.table, sample.references, all, text, truth_for(n));
    }
    sample.response = response;
    out.corpus.samples.push_back(std::move(sample));
  }
  return out;
}

std::filesystem::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("citerefine-test-" + name + "-" + std::to_string(::getpid()) + "-" +
              std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

StubServer::StubServer() : server_(std::make_unique<httplib::Server>()) {}

StubServer::~StubServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void StubServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string StubServer::url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void install_nli_stub(StubServer& stub, const citerefine::TableBackend& table,
                      const std::string& model_id) {
  auto copy = std::make_shared<citerefine::TableBackend>(table.entries());
  stub.server().Get("/health", [model_id](const httplib::Request&,
                                          httplib::Response& res) {
    nlohmann::json j = {{"status", "ok"}, {"model_id", model_id}};
    res.set_content(j.dump(), "application/json");
  });
  stub.server().Post("/v1/entail", [copy, model_id](const httplib::Request& req,
                                                    httplib::Response& res) {
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.contains("premise") || !j.contains("hypothesis") ||
        j["hypothesis"].get<std::string>().empty()) {
      res.status = 400;
      return;
    }
    std::string p = j["premise"], h = j["hypothesis"];
    bool v = copy->query({{}, p, h});
    nlohmann::json out = {{"label", v ? "entailment" : "not_entailment"},
                          {"score", v ? 1.0 : 0.0},
                          {"model_id", model_id}};
    res.set_content(out.dump(), "application/json");
  });
}

}  // namespace testing
