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

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "insitu/column_cache.h"
#include "insitu/exec.h"
#include "insitu/query_model.h"

namespace insitu {

enum class JournalMode { kOff, kOn };

struct LoadStats {
  std::uint64_t rows_loaded = 0;
  std::uint64_t input_bytes = 0;
  std::uint64_t binary_bytes = 0;
  std::uint64_t journal_bytes = 0;
  double duration_ms = 0;

  std::uint64_t total_written() const { return binary_bytes + journal_bytes; }
};

struct ColumnMeta {
  std::string name;
  bool numeric = true;
  bool has_range = false;
  double min = 0;
  double max = 0;
};

// Catalog entry of a loaded table.
struct TableStore {
  std::string name;
  std::string dir;
  std::vector<ColumnMeta> schema;
  std::uint64_t row_count = 0;

  const ColumnMeta* Find(const std::string& attr) const;
};

class DbEngine;

// Streams rows into a new table. Column files start with a 16-byte header
// ("ICOL", type byte, 3 pad bytes, little-endian u64 count) followed by
// 8-byte doubles or u32-length-prefixed text. The column type is fixed by
// the first row; a later value that does not fit aborts the load. Dropping
// an uncommitted writer removes the partial table.
class TableWriter {
 public:
  TableWriter(DbEngine& engine, const std::string& table,
              std::vector<std::string> columns, JournalMode journal);
  ~TableWriter();

  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;

  // `fields` follow the column order given at construction. `record` is the
  // journal text for the row; when empty the fields are joined with commas.
  void AddRow(const std::vector<std::string_view>& fields,
              std::string_view record = {});
  LoadStats Commit(std::uint64_t input_bytes);
  void Abort();

 private:
  struct ColumnFile {
    std::FILE* file = nullptr;
    ColumnMeta meta;
    bool typed = false;
  };

  DbEngine& engine_;
  std::string table_;
  std::string dir_;
  std::vector<ColumnFile> columns_;
  std::FILE* journal_ = nullptr;
  std::uint64_t rows_ = 0;
  std::chrono::steady_clock::time_point start_;
  bool done_ = false;
  std::string record_buf_;
};

struct DbEngineOptions {
  bool fsync_journal = true;
};

// Load-then-query columnar engine. COPY-style loads convert CSV text into
// typed column files under `<data_dir>/<table>/`, optionally journaling every
// input record first. Queries read whole columns into the cache, prune
// tables by per-column min/max, and join with hash joins.
class DbEngine {
 public:
  DbEngine(std::string data_dir, ColumnCache& cache, DbEngineOptions options = {});

  // Loads every column of `csv`, or only `attrs` when given.
  LoadStats LoadTable(const std::string& csv, const std::string& table,
                      JournalMode journal,
                      const std::vector<std::string>* attrs = nullptr);

  // Empties a loaded table; returns the elapsed milliseconds.
  double TruncateTable(const std::string& table);

  ExecResult Execute(const QueryAst& ast);

  bool HasTable(const std::string& table) const;
  const TableStore& Store(const std::string& table) const;
  const std::string& data_dir() const { return data_dir_; }
  ColumnCache& cache() { return cache_; }

 private:
  friend class TableWriter;

  void Discover();
  void Register(TableStore store);
  std::shared_ptr<const Column> ReadColumn(const TableStore& store,
                                           const ColumnMeta& meta,
                                           ExecStats& stats);

  std::string data_dir_;
  ColumnCache& cache_;
  DbEngineOptions options_;
  std::map<std::string, TableStore> tables_;
};

void WriteMeta(const TableStore& store);
TableStore ReadMeta(const std::string& dir);

}  // namespace insitu
