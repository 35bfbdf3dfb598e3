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
#include <optional>
#include <string>
#include <vector>

#include "insitu/query_model.h"
#include "insitu/value.h"

namespace insitu {

// Per-query measurements reported by both engines.
struct ExecStats {
  double duration_ms = 0;
  std::uint64_t bytes_read_from_disk = 0;
  std::uint64_t bytes_written_to_disk = 0;
  std::uint64_t rows_scanned = 0;
  std::uint64_t cache_hit_columns = 0;
  bool early_stop = false;
  std::uint64_t peak_cache_bytes = 0;
};

struct ExecResult {
  ResultSet result;
  ExecStats stats;
};

namespace exec {

// A table with the columns a query needs already materialized.
struct BoundTable {
  std::string name;
  std::size_t row_count = 0;
  std::map<std::string, std::shared_ptr<const Column>> columns;

  const Column& column(const std::string& attr) const;
};

bool Matches(const Value& v, Comparator op, const Value& literal);

// Rows of `table` satisfying every predicate, in row order. Scanning stops
// once `stop_after` rows matched.
std::vector<std::uint32_t> SelectRows(const BoundTable& table,
                                      const std::vector<Predicate>& preds,
                                      std::optional<std::size_t> stop_after,
                                      std::uint64_t& rows_scanned);

enum class JoinAlgorithm { kNestedLoop, kHash };

// tuples[t][i] is the row of table t in output tuple i.
using Tuples = std::vector<std::vector<std::uint32_t>>;

// Joins the selections left to right. Output order is the nested-loop order
// (outer tuple order, then inner row order) for both algorithms, so LIMIT
// picks the same rows either way. The nested loop throws Error(kJoinGuard)
// when a step would compare more than `join_guard` row pairs.
Tuples Join(const QueryAst& ast, const std::vector<const BoundTable*>& tables,
            std::vector<std::vector<std::uint32_t>> selections,
            JoinAlgorithm algorithm, std::uint64_t join_guard);

ResultSet Project(const QueryAst& ast,
                  const std::vector<const BoundTable*>& tables,
                  const Tuples& tuples);

// Select, join, project and limit over bound tables (in ast.tables order).
// `empty_tables` marks tables whose selection is known to be empty without
// scanning (min/max pruning).
ResultSet Run(const QueryAst& ast, const std::vector<const BoundTable*>& tables,
              JoinAlgorithm algorithm, std::uint64_t join_guard,
              ExecStats& stats,
              const std::vector<bool>& empty_tables = {});

}  // namespace exec
}  // namespace insitu
