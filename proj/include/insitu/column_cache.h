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
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "insitu/value.h"

namespace insitu {

// Byte offsets of the data rows of one CSV file.
struct PositionalMap {
  std::string file;
  std::uint64_t file_size = 0;
  std::int64_t mtime_ns = 0;
  std::vector<std::string> header;
  std::vector<std::uint64_t> row_offsets;

  std::size_t row_count() const { return row_offsets.size(); }
  std::uint64_t byte_size() const { return 8 * row_offsets.size(); }
};

// (file or table directory, attribute). The positional map of a file is
// stored under the empty attribute name.
using CacheKey = std::pair<std::string, std::string>;

struct CacheEntry {
  std::shared_ptr<const Column> column;
  std::shared_ptr<const PositionalMap> posmap;

  std::uint64_t byte_size() const {
    return column ? column->byte_size() : (posmap ? posmap->byte_size() : 0);
  }
};

// RAM-budgeted cache of parsed columns with least-recently-used eviction of
// whole entries. Resident bytes never exceed the budget. Thread-safe.
class ColumnCache {
 public:
  explicit ColumnCache(std::uint64_t budget_bytes) : budget_(budget_bytes) {}

  ColumnCache(const ColumnCache&) = delete;
  ColumnCache& operator=(const ColumnCache&) = delete;

  // Returns the entry and marks it most recently used; empty when absent.
  CacheEntry Get(const CacheKey& key);
  bool Contains(const CacheKey& key) const;

  // Inserts or replaces. Evicts least-recently-used entries until the new
  // entry fits. Throws Error(kBudgetExceeded) if it can never fit.
  void Put(const CacheKey& key, CacheEntry entry);

  // Drops every entry belonging to `file`.
  void EraseFile(const std::string& file);
  void Clear();

  std::uint64_t budget() const { return budget_; }
  std::uint64_t resident_bytes() const;
  std::uint64_t peak_bytes() const;
  std::size_t entry_count() const;
  std::uint64_t evictions() const;

 private:
  struct Slot {
    CacheEntry entry;
    std::uint64_t bytes;
    std::list<CacheKey>::iterator lru_pos;
  };

  void EraseLocked(std::map<CacheKey, Slot>::iterator it);

  const std::uint64_t budget_;
  mutable std::mutex mu_;
  std::map<CacheKey, Slot> slots_;
  std::list<CacheKey> lru_;  // front = most recent
  std::uint64_t resident_ = 0;
  std::uint64_t peak_ = 0;
  std::uint64_t evictions_ = 0;
};

}  // namespace insitu
