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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace citerefine {

// Base of every error raised by the library. Callers that only want to
// report and exit can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file: carries the 1-based line (or record) number.
class ParseError : public Error {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

class DuplicateIdError : public Error {
 public:
  explicit DuplicateIdError(std::string id)
      : Error("duplicate sample id '" + id + "'"), id_(std::move(id)) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A citation id outside [1, n_refs] where the caller promised it would be
// in range (rewrite, refiner records).
class CitationRangeError : public Error {
 public:
  CitationRangeError(std::size_t statement, int id)
      : Error("statement " + std::to_string(statement) +
              ": citation id " + std::to_string(id) + " out of range"),
        statement_(statement),
        id_(id) {}
  std::size_t statement() const { return statement_; }
  int id() const { return id_; }

 private:
  std::size_t statement_;
  int id_;
};

// Transport failure that survived the retry budget.
class BackendUnavailable : public Error {
 public:
  BackendUnavailable(std::string endpoint, const std::string& what)
      : Error("backend unavailable at " + endpoint + ": " + what),
        endpoint_(std::move(endpoint)) {}
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

// The peer answered, but not in the agreed format. raw() is the body.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::string raw)
      : Error(what + ": " + raw), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class EnumerationCapError : public Error {
 public:
  EnumerationCapError(std::size_t statement, std::size_t size, std::size_t cap)
      : Error("statement " + std::to_string(statement) + ": " +
              std::to_string(size) + " candidates exceed enumeration cap " +
              std::to_string(cap)),
        statement_(statement),
        size_(size),
        cap_(cap) {}
  std::size_t statement() const { return statement_; }
  std::size_t size() const { return size_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t statement_;
  std::size_t size_;
  std::size_t cap_;
};

}  // namespace citerefine
