// Copyright 2026 The agentprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace agentprobe {

// Base of every error the library throws. Subclasses let the CLI map failures
// onto exit codes without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or stream. `index` is the zero-based record (line)
// index when known, -1 otherwise.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long index = -1)
      : Error(index >= 0 ? what + " (record " + std::to_string(index) + ")"
                         : what),
        index_(index) {}
  long index() const { return index_; }

 private:
  long index_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class UnknownBackendError : public Error {
 public:
  using Error::Error;
};

class CassetteMissError : public Error {
 public:
  using Error::Error;
};

class JudgingError : public Error {
 public:
  using Error::Error;
};

class ExpansionDegenerateError : public Error {
 public:
  using Error::Error;
};

class ReflectionError : public Error {
 public:
  using Error::Error;
};

class DuplicatePromptError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IntegrityError : public Error {
 public:
  using Error::Error;
};

}  // namespace agentprobe
