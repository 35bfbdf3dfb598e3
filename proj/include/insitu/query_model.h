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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "insitu/value.h"

namespace insitu {

// One workload entry: a task identifier and its statement text.
struct WorkloadTask {
  std::string task_id;
  std::string statement;

  bool operator==(const WorkloadTask&) const = default;
};

// Parses a workload file: header `T_ID,Statement`, then `id,"statement"` per
// line with CSV quoting. Throws FormatError on unbalanced quotes, missing
// fields, empty values and duplicate ids.
std::vector<WorkloadTask> ParseWorkload(std::string_view text);
std::vector<WorkloadTask> ReadWorkloadFile(const std::string& path);

enum class StatementKind { kSelect, kTruncate, kCopy };
enum class Comparator { kLt, kGt, kLe, kGe, kEq };

const char* ComparatorSymbol(Comparator op);

// Table-qualified, lower-cased attribute reference.
struct AttrRef {
  std::string table;
  std::string name;

  std::string Qualified() const { return table + "." + name; }
  auto operator<=>(const AttrRef&) const = default;
};

struct Predicate {
  AttrRef attr;
  Comparator op = Comparator::kEq;
  Value literal;

  bool operator==(const Predicate&) const = default;
};

// Equality join. `left` belongs to an earlier table in FROM order, `right` to
// the table introduced by this join.
struct JoinCondition {
  AttrRef left;
  AttrRef right;

  bool operator==(const JoinCondition&) const = default;
};

struct QueryAst {
  StatementKind kind = StatementKind::kSelect;
  // SELECT COUNT(arg); `count_arg` is empty for COUNT(*).
  bool count = false;
  std::optional<AttrRef> count_arg;
  std::vector<AttrRef> projections;
  std::vector<std::string> tables;
  std::vector<JoinCondition> joins;
  std::vector<Predicate> predicates;
  std::optional<std::uint64_t> limit;
  // Source path of a COPY statement.
  std::string copy_path;

  bool operator==(const QueryAst&) const = default;

  bool is_load() const { return kind != StatementKind::kSelect; }
  // Every attribute referenced anywhere, in first-seen order, deduplicated.
  std::vector<AttrRef> ReferencedAttrs() const;
  std::vector<AttrRef> AttrsOfTable(const std::string& table) const;
  std::vector<Predicate> PredicatesOfTable(const std::string& table) const;
};

// Parses the SQL subset:
//   SELECT a, b | COUNT(a|*) FROM t [JOIN u ON t.x = u.y]* [WHERE p AND ...]
//   [LIMIT n]
//   TRUNCATE [TABLE] t
//   COPY t FROM 'path' [options]
// Keywords are case-insensitive; identifiers are folded to lower case. A
// bare attribute name belongs to the first table after FROM.
// Throws ParseError (with byte offset) or Error(kDomain) for LIMIT 0.
QueryAst ParseQuery(std::string_view statement);

// Debug pretty-printer; ParseQuery(Render(ast)) == ast.
std::string Render(const QueryAst& ast);

enum class QueryKind { kSimple, kComplex, kSampling };

const char* QueryKindName(QueryKind kind);

struct QueryClass {
  std::size_t join_count = 0;
  bool is_sampling = false;
  std::set<std::string> attrs;  // qualified names
  QueryKind kind = QueryKind::kSimple;

  bool operator==(const QueryClass&) const = default;
};

QueryClass Classify(const QueryAst& ast);

}  // namespace insitu
