// Copyright 2026 The invlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef INVLAB_ERROR_H_
#define INVLAB_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace invlab {

// Root of every error raised by the library. Callers that only need a
// diagnostic can catch this and print what().
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad ratio, empty text, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed input file. line() is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line,
             const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

// A remote embedding provider replied with something unusable.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Embedding cache exists but was produced for another victim or corpus.
class StaleCacheError : public Error {
 public:
  using Error::Error;
};

// Checkpoint manifest does not match the vocabulary or victim in use.
class CheckpointMismatch : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN/Inf loss.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t batch_index)
      : Error(what), batch_index_(batch_index) {}
  std::size_t batch_index() const { return batch_index_; }

 private:
  std::size_t batch_index_;
};

// Wraps any failure inside an experiment stage with the stage name.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace invlab

#endif  // INVLAB_ERROR_H_
