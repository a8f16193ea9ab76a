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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace citerefine {

// One QA instance. Reference i (0-based here) is cited as [i+1].
struct Sample {
  std::string id;
  std::string question;
  std::vector<std::string> references;
  std::optional<std::string> answer;
  // Additional gold answers for multi-reference correctness scoring.
  std::vector<std::string> answers;
  std::optional<std::string> response;

  // Gold strings for BLEU/ROUGE: `answers` when present, else `answer`.
  std::vector<std::string> gold_answers() const;

  bool operator==(const Sample&) const = default;
};

struct Corpus {
  std::vector<Sample> samples;
  std::string source_path;

  const Sample* find(const std::string& id) const;
};

enum class CorpusFormat { kWebglmJsonl, kAlceJson };

CorpusFormat parse_corpus_format(const std::string& name);
const char* to_string(CorpusFormat format);

// Throws ParseError (line + field) on malformed records and DuplicateIdError
// on repeated ids. Missing optional fields stay std::nullopt.
Corpus load_samples(const std::filesystem::path& path, CorpusFormat format);

Corpus parse_samples_jsonl(const std::string& bytes, const std::string& source);
Corpus parse_samples_alce(const std::string& bytes, const std::string& source);

struct Predictions {
  std::map<std::string, std::string> responses;
  // Ids that do not resolve to a corpus sample (kept in `responses`).
  std::vector<std::string> unknown_ids;
};

// `corpus` may be null, in which case no unknown-id check happens. Unknown
// ids are logged to stderr as warnings.
Predictions load_predictions(const std::filesystem::path& path,
                             const Corpus* corpus = nullptr);

// Samples JSONL writer, the inverse of the webglm-jsonl loader.
void write_samples_jsonl(const Corpus& corpus, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

// Writes `bytes` to `path`, failing with IoError if the parent directory is
// missing or the file cannot be opened.
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace citerefine
