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

#include <atomic>
#include <fstream>
#include <random>

#include "citerefine/corpus.hpp"
#include "citerefine/entail.hpp"
#include "citerefine/errors.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"

using namespace citerefine;

TEST_SUITE("backends") {
  TEST_CASE("table lookup and default") {
    TableBackend t;
    t.set("P", "H", true);
    EntailmentCache cache;
    CHECK(entails(t, cache, "P", "H"));
    CHECK_FALSE(entails(t, cache, "P", "other"));
  }

  TEST_CASE("table identity tracks contents") {
    TableBackend a, b;
    a.set("P", "H", true);
    b.set("P", "H", true);
    CHECK(a.identity() == b.identity());
    b.set("P", "H", false);
    CHECK(a.identity() != b.identity());
  }

  TEST_CASE("lexical rule") {
    LexicalBackend lex;
    EntailmentCache cache;
    CHECK(entails(lex, cache, "the cat sat on the mat", "cat sat"));
    CHECK(entails(lex, cache, "Rayleigh scattering, mostly.", "rayleigh SCATTERING!"));
    CHECK_FALSE(entails(lex, cache, "the cat sat on the mat", "the dogs barked"));
    CHECK(LexicalBackend::tokenize("Don't stop, ok?") ==
          std::vector<std::string>{"dont", "stop", "ok"});
  }

  TEST_CASE("lexical is monotone in the premise") {
    std::mt19937_64 rng(3);
    const char* words[] = {"alpha", "beta", "gamma", "delta", "ox", "sky", "blue", "light"};
    std::uniform_int_distribution<int> w(0, 7), len(0, 6);
    LexicalBackend lex;
    for (int i = 0; i < 2000; ++i) {
      auto phrase = [&] {
        std::string s;
        for (int k = len(rng); k > 0; --k) s += std::string(words[w(rng)]) + " ";
        return s + "end";
      };
      std::string p = phrase(), h = phrase(), x = phrase();
      if (lex.query({{}, p, h})) CHECK(lex.query({{}, p + "\n" + x, h}));
    }
  }

  TEST_CASE("empty premise or hypothesis is rejected") {
    LexicalBackend lex;
    EntailmentCache cache;
    CHECK_THROWS_AS(entails(lex, cache, "", "h"), std::invalid_argument);
    CHECK_THROWS_AS(entails(lex, cache, "p", ""), std::invalid_argument);
  }
}

TEST_CASE("concat_passages") {
  CHECK(concat_passages(std::vector<std::string>{"A", "B"}) == "A\nB");
  CHECK(concat_passages(std::vector<std::string>{"A"}) == "A");
  CHECK(concat_passages(std::vector<std::string>{}) == "");
}

TEST_SUITE("judge protocol") {
  TEST_CASE("prompt embeds passages and statement") {
    std::vector<std::string> one{"P"};
    std::string p = render_judge_prompt("S", one);
    CHECK(p.find("[1] P") != std::string::npos);
    CHECK(p.find("Statement: S") != std::string::npos);
    CHECK(p.find("\"Yes\"") != std::string::npos);
    CHECK(p.find("\"No\"") != std::string::npos);

    std::string none = render_judge_prompt("S", {});
    CHECK(none.find("no references") != std::string::npos);

    std::vector<std::string> two{"first passage", "second passage"};
    std::string q = render_judge_prompt("S", two);
    CHECK(q.find("[1] first passage") != std::string::npos);
    CHECK(q.find("[2] second passage") != std::string::npos);
  }

  TEST_CASE("reply parsing") {
    CHECK(parse_judge_reply("Yes."));
    CHECK_FALSE(parse_judge_reply("no, the passage does not support it"));
    CHECK(parse_judge_reply("  **YES**"));
    try {
      parse_judge_reply("Maybe");
      FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
      CHECK(e.raw() == "Maybe");
    }
    CHECK_THROWS_AS(parse_judge_reply(""), ProtocolError);
    CHECK_THROWS_AS(parse_judge_reply("Yesterday"), ProtocolError);
  }
}

TEST_SUITE("cache") {
  TEST_CASE("key is framed") {
    CHECK(cache_key("id", "ab", "c") != cache_key("id", "a", "bc"));
    CHECK(cache_key("id", "p", "h") == cache_key("id", "p", "h"));
    CHECK(cache_key("id", "p", "h").size() == 64);
  }

  TEST_CASE("hits never reach the backend; entries persist") {
    auto dir = testing::temp_dir("cache");
    TableBackend table;
    table.set("P", "H", true);
    {
      EntailmentCache cache(dir / "c.jsonl");
      Entailer e(table, cache);
      CHECK(e.entails("P", "H"));
      CHECK(e.entails("P", "H"));
      CHECK_FALSE(e.entails("P", "X"));
      CHECK(table.calls() == 2);
    }
    {
      EntailmentCache cache(dir / "c.jsonl");
      CHECK(cache.size() == 2);
      Entailer e(table, cache);
      CHECK(e.entails("P", "H"));
      CHECK_FALSE(e.entails("P", "X"));
      CHECK(table.calls() == 2);
    }
    // Append-only: two lines, no rewrite.
    std::string bytes = read_file(dir / "c.jsonl");
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 2);
    auto first = nlohmann::json::parse(bytes.substr(0, bytes.find('\n')));
    CHECK(first["k"].get<std::string>().size() == 64);
    CHECK(first["v"] == true);
  }

  TEST_CASE("identity change misses the cache") {
    auto dir = testing::temp_dir("cache-id");
    TableBackend a;
    a.set("P", "H", true);
    EntailmentCache cache(dir / "c.jsonl");
    {
      Entailer e(a, cache);
      CHECK(e.entails("P", "H"));
    }
    TableBackend b;
    b.set("P", "H", false);
    Entailer e(b, cache);
    CHECK_FALSE(e.entails("P", "H"));
    CHECK(b.calls() == 1);
  }

  TEST_CASE("torn final line is ignored, corrupt middle line is not") {
    auto dir = testing::temp_dir("cache-torn");
    const std::string key = cache_key("x", "p", "h");
    {
      std::ofstream f(dir / "torn.jsonl");
      f << "{\"k\":\"" << key << "\",\"v\":true}\n{\"k\":\"ab";
    }
    {
      EntailmentCache cache(dir / "torn.jsonl");
      CHECK(cache.size() == 1);
      cache.insert(cache_key("x", "p", "h2"), false);
    }
    EntailmentCache again(dir / "torn.jsonl");
    CHECK(again.size() == 2);
    CHECK(again.lookup(key) == true);

    {
      std::ofstream f(dir / "bad.jsonl");
      f << "garbage\n{\"k\":\"" << key << "\",\"v\":true}\n";
    }
    CHECK_THROWS_AS(EntailmentCache{dir / "bad.jsonl"}, ParseError);
  }

  TEST_CASE("concurrent lookups and appends") {
    auto dir = testing::temp_dir("cache-mt");
    LexicalBackend lex;
    EntailmentCache cache(dir / "c.jsonl");
    Entailer e(lex, cache);
    std::vector<std::thread> pool;
    for (int t = 0; t < 8; ++t)
      pool.emplace_back([&] {
        for (int i = 0; i < 200; ++i)
          e.entails("premise number " + std::to_string(i % 50), "premise");
      });
    for (auto& th : pool) th.join();
    CHECK(cache.size() == 50);
    EntailmentCache reread(dir / "c.jsonl");
    CHECK(reread.size() == 50);
  }
}

TEST_SUITE("nli-http") {
  TEST_CASE("protocol round trip against a stub") {
    TableBackend table;
    table.set("The cat is black.", "The cat is black.", true);
    testing::StubServer stub;
    testing::install_nli_stub(stub, table, "stub-model");
    stub.start();

    HttpOptions o;
    o.endpoint = stub.url();
    NliHttpBackend nli(o);
    CHECK(nli.model_id() == "stub-model");
    CHECK(nli.identity().find("stub-model") != std::string::npos);
    EntailmentCache cache;
    Entailer e(nli, cache);
    CHECK(e.entails("The cat is black.", "The cat is black."));
    CHECK_FALSE(e.entails("The cat is black.", "The cat is white."));
    CHECK(e.entails("The cat is black.", "The cat is black."));
    CHECK(nli.calls() == 2);
  }

  TEST_CASE("request body shape") {
    testing::StubServer stub;
    std::string seen;
    stub.server().Post("/v1/entail", [&](const httplib::Request& req, httplib::Response& res) {
      seen = req.body;
      res.set_content(R"({"label":"entailment","score":0.97})", "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url() + "/";
    NliHttpBackend nli(o, "m");
    CHECK(nli.query({{}, "prem", "hyp"}));
    auto j = nlohmann::json::parse(seen);
    CHECK(j == nlohmann::json{{"premise", "prem"}, {"hypothesis", "hyp"}});
  }

  TEST_CASE("unknown label is a protocol error") {
    testing::StubServer stub;
    stub.server().Post("/v1/entail", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"label":"neutral","score":0.5})", "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    NliHttpBackend nli(o, "m");
    CHECK_THROWS_AS(nli.query({{}, "p", "h"}), ProtocolError);
  }

  TEST_CASE("non-200 is retried, then reported with the endpoint") {
    testing::StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/v1/entail", [&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.status = 503;
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    o.backoff = std::chrono::milliseconds(1);
    NliHttpBackend nli(o, "m");
    try {
      nli.query({{}, "p", "h"});
      FAIL("expected BackendUnavailable");
    } catch (const BackendUnavailable& e) {
      CHECK(e.endpoint() == stub.url());
      CHECK(std::string(e.what()).find(stub.url()) != std::string::npos);
    }
    CHECK(hits == 3);
  }

  TEST_CASE("transient failure recovers within the retry budget") {
    testing::StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/v1/entail", [&](const httplib::Request&, httplib::Response& res) {
      if (++hits < 3) {
        res.status = 500;
        return;
      }
      res.set_content(R"({"label":"entailment","score":1})", "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    o.backoff = std::chrono::milliseconds(1);
    NliHttpBackend nli(o, "m");
    CHECK(nli.query({{}, "p", "h"}));
  }

  TEST_CASE("unreachable endpoint fails at construction") {
    HttpOptions o;
    o.endpoint = "http://127.0.0.1:1";
    o.backoff = std::chrono::milliseconds(1);
    o.timeout = std::chrono::milliseconds(200);
    CHECK_THROWS_AS(NliHttpBackend{o}, BackendUnavailable);
  }
}

TEST_SUITE("llm-judge") {
  TEST_CASE("temperature 0, single user message, numbered passages") {
    testing::StubServer stub;
    nlohmann::json seen;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Yes"}}]})",
                      "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    LlmJudgeBackend judge(o, "gpt-test");
    EntailmentCache cache;
    Entailer e(judge, cache);
    std::vector<std::string> passages{"alpha", "beta"};
    CHECK(e.supports(passages, "claim"));
    CHECK(seen["temperature"] == 0);
    CHECK(seen["model"] == "gpt-test");
    REQUIRE(seen["messages"].size() == 1);
    CHECK(seen["messages"][0]["role"] == "user");
    std::string content = seen["messages"][0]["content"];
    CHECK(content == render_judge_prompt("claim", passages));
    CHECK(judge.identity().find(kJudgePromptVersion) != std::string::npos);
  }

  TEST_CASE("unparseable reply: one retry, then protocol error with raw text") {
    testing::StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      ++hits;
      res.set_content(R"({"choices":[{"message":{"content":"Perhaps"}}]})", "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    LlmJudgeBackend judge(o, "m");
    try {
      judge.query({{}, "p", "h"});
      FAIL("expected ProtocolError");
    } catch (const ProtocolError& e) {
      CHECK(e.raw() == "Perhaps");
    }
    CHECK(hits == 2);
  }

  TEST_CASE("retry can recover") {
    testing::StubServer stub;
    std::atomic<int> hits{0};
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
      const char* reply = ++hits == 1 ? "Unsure" : "No.";
      nlohmann::json j = {{"choices", {{{"message", {{"content", reply}}}}}}};
      res.set_content(j.dump(), "application/json");
    });
    stub.start();
    HttpOptions o;
    o.endpoint = stub.url();
    LlmJudgeBackend judge(o, "m");
    CHECK_FALSE(judge.query({{}, "p", "h"}));
  }
}
