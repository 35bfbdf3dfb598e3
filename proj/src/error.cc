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

#include "insitu/error.h"

namespace insitu {

const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBudgetExceeded: return "budget-exceeded";
    case ErrorKind::kJoinGuard: return "join-guard";
    case ErrorKind::kNotLoaded: return "not-loaded";
    case ErrorKind::kUnknownTable: return "unknown-table";
    case ErrorKind::kAlreadyLoaded: return "already-loaded";
    case ErrorKind::kUncoveredQuery: return "uncovered-query";
    case ErrorKind::kSourceUnavailable: return "source-unavailable";
    case ErrorKind::kMonitor: return "monitor";
  }
  return "unknown";
}

}  // namespace insitu
