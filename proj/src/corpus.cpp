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

#include "citerefine/corpus.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "citerefine/errors.hpp"
#include "json.hpp"

namespace citerefine {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::vector<std::string> Sample::gold_answers() const {
  if (!answers.empty()) return answers;
  if (answer) return {*answer};
  return {};
}

const Sample* Corpus::find(const std::string& id) const {
  for (const Sample& s : samples)
    if (s.id == id) return &s;
  return nullptr;
}

CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "webglm-jsonl" || name == "jsonl") return CorpusFormat::kWebglmJsonl;
  if (name == "alce-json" || name == "alce") return CorpusFormat::kAlceJson;
  throw std::invalid_argument("unknown corpus format '" + name +
                              "' (expected webglm-jsonl or alce-json)");
}

const char* to_string(CorpusFormat format) {
  return format == CorpusFormat::kWebglmJsonl ? "webglm-jsonl" : "alce-json";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty() && !std::filesystem::is_directory(parent, ec))
    throw IoError("directory does not exist: " + parent.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << bytes;
  out.flush();
  if (!out) throw IoError("short write to " + path.string());
}

namespace {

struct RecordReader {
  const std::string& source;
  std::size_t line;
  const json& j;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw ParseError(source, line, "field '" + field + "': " + what);
  }

  std::string required_string(const char* field) const {
    if (!j.contains(field)) fail(field, "missing");
    if (!j[field].is_string()) fail(field, "expected a string");
    return j[field].get<std::string>();
  }

  std::optional<std::string> optional_string(const char* field) const {
    if (!j.contains(field) || j[field].is_null()) return std::nullopt;
    if (!j[field].is_string()) fail(field, "expected a string");
    return j[field].get<std::string>();
  }

  std::vector<std::string> string_array(const char* field, bool required) const {
    std::vector<std::string> out;
    if (!j.contains(field) || j[field].is_null()) {
      if (required) fail(field, "missing");
      return out;
    }
    if (!j[field].is_array()) fail(field, "expected an array of strings");
    for (const json& v : j[field]) {
      if (!v.is_string()) fail(field, "expected an array of strings");
      out.push_back(v.get<std::string>());
    }
    return out;
  }
};

void add_unique(Corpus& corpus, std::set<std::string>& seen, Sample sample) {
  if (!seen.insert(sample.id).second) throw DuplicateIdError(sample.id);
  corpus.samples.push_back(std::move(sample));
}

}  // namespace

Corpus parse_samples_jsonl(const std::string& bytes, const std::string& source) {
  Corpus corpus;
  corpus.source_path = source;
  std::set<std::string> seen;
  std::istringstream in(bytes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(source, lineno, "invalid JSON");
    if (!j.is_object()) throw ParseError(source, lineno, "expected an object");
    RecordReader r{source, lineno, j};
    Sample s;
    s.id = r.required_string("id");
    if (s.id.empty()) r.fail("id", "must be non-empty");
    s.question = r.required_string("question");
    s.references = r.string_array("references", true);
    s.answer = r.optional_string("answer");
    s.answers = r.string_array("answers", false);
    s.response = r.optional_string("response");
    add_unique(corpus, seen, std::move(s));
  }
  return corpus;
}

Corpus parse_samples_alce(const std::string& bytes, const std::string& source) {
  Corpus corpus;
  corpus.source_path = source;
  if (bytes.find_first_not_of(" \t\r\n") == std::string::npos) return corpus;
  json root = json::parse(bytes, nullptr, false);
  if (root.is_discarded()) throw ParseError(source, 1, "invalid JSON");
  if (root.is_object() && root.contains("data")) root = root["data"];
  if (!root.is_array())
    throw ParseError(source, 1, "expected a JSON array of samples");
  std::set<std::string> seen;
  std::size_t record = 0;
  for (const json& j : root) {
    ++record;
    if (!j.is_object()) throw ParseError(source, record, "expected an object");
    RecordReader r{source, record, j};
    Sample s;
    for (const char* key : {"id", "sample_id", "question_id"}) {
      if (j.contains(key) && j[key].is_string()) {
        s.id = j[key].get<std::string>();
        break;
      }
    }
    if (s.id.empty()) s.id = "alce-" + std::to_string(record);
    s.question = r.required_string("question");
    if (!j.contains("docs") || !j["docs"].is_array()) r.fail("docs", "missing");
    for (const json& doc : j["docs"]) {
      if (!doc.is_object() || !doc.contains("text") || !doc["text"].is_string())
        r.fail("docs", "each doc needs a string 'text'");
      std::string passage = doc["text"].get<std::string>();
      if (doc.contains("title") && doc["title"].is_string() &&
          !doc["title"].get<std::string>().empty())
        passage = doc["title"].get<std::string>() + "\n" + passage;
      s.references.push_back(std::move(passage));
    }
    s.answer = r.optional_string("answer");
    s.answers = r.string_array("answers", false);
    s.response = r.optional_string("output");
    if (!s.response) s.response = r.optional_string("response");
    add_unique(corpus, seen, std::move(s));
  }
  return corpus;
}

Corpus load_samples(const std::filesystem::path& path, CorpusFormat format) {
  const std::string bytes = read_file(path);
  return format == CorpusFormat::kWebglmJsonl
             ? parse_samples_jsonl(bytes, path.string())
             : parse_samples_alce(bytes, path.string());
}

Predictions load_predictions(const std::filesystem::path& path,
                             const Corpus* corpus) {
  Predictions preds;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t lineno = 0;
  const std::string source = path.string();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(source, lineno, "invalid JSON");
    if (!j.is_object()) throw ParseError(source, lineno, "expected an object");
    RecordReader r{source, lineno, j};
    std::string id = r.required_string("id");
    std::string response = r.required_string("response");
    if (preds.responses.contains(id)) throw DuplicateIdError(id);
    if (corpus != nullptr && corpus->find(id) == nullptr) {
      std::cerr << "warning: " << source << ":" << lineno << ": prediction id '"
                << id << "' is not in the corpus\n";
      preds.unknown_ids.push_back(id);
    }
    preds.responses.emplace(std::move(id), std::move(response));
  }
  return preds;
}

void write_samples_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const Sample& s : corpus.samples) {
    ordered_json j;
    j["id"] = s.id;
    j["question"] = s.question;
    j["references"] = s.references;
    if (s.answer) j["answer"] = *s.answer;
    if (!s.answers.empty()) j["answers"] = s.answers;
    if (s.response) j["response"] = *s.response;
    out += j.dump() + "\n";
  }
  write_file(path, out);
}

}  // namespace citerefine
