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

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "citerefine/corpus.hpp"
#include "citerefine/entail.hpp"
#include "citerefine/segment.hpp"
#include "oracles/oracles.hpp"

namespace httplib {
class Server;
}

namespace testing {

using citerefine::CitationIds;
using oracle::Mask;
using oracle::Truth;

// Distinct, lexically unrelated passages "passage-<tag>-<k> ...".
std::vector<std::string> make_refs(std::size_t n, const std::string& tag = "r");

// Writes φ(concat(refs[ids[mask]]), statement) = truth(mask) for every
// non-empty mask over the positions of `ids`.
void add_truth(citerefine::TableBackend& table,
               const std::vector<std::string>& refs, const CitationIds& ids,
               const std::string& statement, const Truth& truth);

// Truth table stored as a bit vector over 2^n masks (bit 0 unused).
struct RandomTruth {
  std::vector<bool> bits;
  bool operator()(Mask m) const { return bits[m]; }
};
RandomTruth random_truth(std::size_t n, std::mt19937_64& rng, double p = 0.5);

// Monotone truth: upward closure of a random antichain of minimal sets.
// With `nonempty`, at least one subset supports.
struct MonotoneTruth {
  std::vector<Mask> minimal;
  bool operator()(Mask m) const;
};
MonotoneTruth random_monotone_truth(std::size_t n, std::mt19937_64& rng,
                                    bool nonempty);

CitationIds ids_of(Mask m, const CitationIds& ids);

// Random response-ish text with markers, punctuation, abbreviations,
// whitespace runs, stray brackets and multi-byte UTF-8.
std::string fuzz_response(std::mt19937_64& rng, std::size_t max_refs);
// Plain sentences with markers only at sentence ends.
std::string well_formed_response(std::mt19937_64& rng, std::size_t n_statements,
                                 std::size_t n_refs);

// A corpus of plain statements with a table oracle covering every non-empty
// subset of each sample's references for every statement.
struct SyntheticCorpus {
  citerefine::Corpus corpus;
  std::unique_ptr<citerefine::TableBackend> table =
      std::make_unique<citerefine::TableBackend>();
};

struct SyntheticShape {
  std::size_t max_samples = 10;
  std::size_t max_statements = 5;
  std::size_t max_refs = 5;
  std::size_t max_citations = 5;
};

// `truth_for(n_refs)` supplies the truth over reference subsets for one
// statement; bit k of a mask stands for reference k + 1.
SyntheticCorpus synthetic_corpus(
    std::mt19937_64& rng, const SyntheticShape& shape,
    const std::function<Truth(std::size_t)>& truth_for);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

// An HTTP server on 127.0.0.1 with a random port, running on its own thread.
class StubServer {
 public:
  StubServer();
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  httplib::Server& server() { return *server_; }
  // Binds and starts serving; handlers must be registered before.
  void start();
  std::string url() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// A /v1/entail + /health stub answering from a (premise, hypothesis) table.
void install_nli_stub(StubServer& stub, const citerefine::TableBackend& table,
                      const std::string& model_id = "stub-nli");

}  // namespace testing
