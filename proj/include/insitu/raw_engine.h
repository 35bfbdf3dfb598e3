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

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "insitu/column_cache.h"
#include "insitu/exec.h"
#include "insitu/query_model.h"

namespace insitu {

// Scans `path` once and records the offset of every data row. Throws
// FormatError naming the line of a row whose field count differs from the
// header's.
PositionalMap BuildPositionalMap(const std::string& path);

struct RawEngineOptions {
  // Largest number of row pairs a single nested-loop join step may compare.
  std::uint64_t join_guard = 1'000'000'000ULL;
  std::size_t read_block_bytes = 1 << 20;
};

// In-situ execution over CSV files. Nothing is loaded up front: the first
// query that touches a column tokenizes the file, parses the column, and
// caches it together with the file's positional map. LIMIT queries without
// joins stream the file and stop at the row that completes the result.
// Joins run as unindexed nested loops. The engine never writes to disk.
//
// One query at a time per instance.
class RawEngine {
 public:
  explicit RawEngine(ColumnCache& cache, RawEngineOptions options = {});

  void BindTable(const std::string& table, const std::string& csv_path);
  bool HasTable(const std::string& table) const;
  const std::string& FileOf(const std::string& table) const;

  // Throws Error(kUnknownTable) for unbound tables, Error(kSchema) for
  // unknown attributes, Error(kBudgetExceeded) when the query's columns do
  // not fit the cache, Error(kJoinGuard) for oversized nested loops.
  ExecResult Execute(const QueryAst& ast);

  // Drops every cached column and positional map; the next query is cold.
  void ClearCache() { cache_.Clear(); }

  ColumnCache& cache() { return cache_; }
  const RawEngineOptions& options() const { return options_; }

 private:
  struct FileState {
    std::string path;
    std::uint64_t size = 0;
    std::int64_t mtime_ns = 0;
  };

  const FileState& CheckFile(const std::string& table);
  void EnsureColumns(const FileState& file, const std::vector<std::string>& attrs,
                     exec::BoundTable& bound, ExecStats& stats,
                     std::uint64_t& working_set);
  ResultSet StreamLimited(const QueryAst& ast, const FileState& file,
                          ExecStats& stats);

  ColumnCache& cache_;
  RawEngineOptions options_;
  std::map<std::string, FileState> files_;
};

}  // namespace insitu
