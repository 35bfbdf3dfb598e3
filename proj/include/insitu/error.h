// Copyright 2026 The insitu Authors
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

namespace insitu {

enum class ErrorKind {
  kConfig,
  kFormat,
  kParse,
  kDomain,
  kSchema,
  kIo,
  kBudgetExceeded,
  kJoinGuard,
  kNotLoaded,
  kUnknownTable,
  kAlreadyLoaded,
  kUncoveredQuery,
  kSourceUnavailable,
  kMonitor,
};

const char* ErrorKindName(ErrorKind kind);

// Base of every error thrown by the library. The kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// SQL-subset syntax error; `offset` is the byte offset into the statement.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error(ErrorKind::kParse,
              message + " at byte " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// Malformed file content; `line` is 1-based (0 when not line-oriented).
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& message)
      : Error(ErrorKind::kFormat,
              line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace insitu
