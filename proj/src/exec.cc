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

#include "insitu/exec.h"

#include <algorithm>
#include <unordered_map>

#include "insitu/error.h"

namespace insitu::exec {

const Column& BoundTable::column(const std::string& attr) const {
  auto it = columns.find(attr);
  if (it == columns.end()) {
    throw Error(ErrorKind::kSchema, "column " + name + "." + attr + " not bound");
  }
  return *it->second;
}

namespace {

bool Holds(int cmp, Comparator op) {
  switch (op) {
    case Comparator::kLt: return cmp < 0;
    case Comparator::kGt: return cmp > 0;
    case Comparator::kLe: return cmp <= 0;
    case Comparator::kGe: return cmp >= 0;
    case Comparator::kEq: return cmp == 0;
  }
  return false;
}

bool HoldsNumeric(double v, Comparator op, double lit) {
  switch (op) {
    case Comparator::kLt: return v < lit;
    case Comparator::kGt: return v > lit;
    case Comparator::kLe: return v <= lit;
    case Comparator::kGe: return v >= lit;
    case Comparator::kEq: return v == lit;
  }
  return false;
}

struct CompiledPred {
  const Column* column;
  Comparator op;
  const Value* literal;
  bool numeric;  // numeric column against numeric literal
  double number;
};

}  // namespace

bool Matches(const Value& v, Comparator op, const Value& literal) {
  return Holds(CompareValues(v, literal), op);
}

std::vector<std::uint32_t> SelectRows(const BoundTable& table,
                                      const std::vector<Predicate>& preds,
                                      std::optional<std::size_t> stop_after,
                                      std::uint64_t& rows_scanned) {
  std::vector<CompiledPred> compiled;
  compiled.reserve(preds.size());
  for (const auto& p : preds) {
    const Column& col = table.column(p.attr.name);
    const bool numeric = col.is_numeric() && p.literal.index() == 0;
    compiled.push_back({&col, p.op, &p.literal, numeric,
                        numeric ? std::get<0>(p.literal) : 0.0});
  }
  std::vector<std::uint32_t> out;
  const std::size_t n = table.row_count;
  if (stop_after && *stop_after == 0) return out;
  std::size_t row = 0;
  for (; row < n; ++row) {
    bool ok = true;
    for (const auto& c : compiled) {
      if (c.numeric) {
        ok = HoldsNumeric(c.column->numbers()[row], c.op, c.number);
      } else {
        ok = Matches(c.column->at(row), c.op, *c.literal);
      }
      if (!ok) break;
    }
    if (ok) {
      out.push_back(static_cast<std::uint32_t>(row));
      if (stop_after && out.size() >= *stop_after) {
        ++row;
        break;
      }
    }
  }
  rows_scanned += row;
  return out;
}

namespace {

std::size_t TableIndex(const QueryAst& ast, const std::string& table) {
  auto it = std::find(ast.tables.begin(), ast.tables.end(), table);
  return static_cast<std::size_t>(it - ast.tables.begin());
}

double NormalizeKey(double v) { return v == 0 ? 0.0 : v; }

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const {
    return CompareValues(a, b) < 0;
  }
};

}  // namespace

Tuples Join(const QueryAst& ast, const std::vector<const BoundTable*>& tables,
            std::vector<std::vector<std::uint32_t>> selections,
            JoinAlgorithm algorithm, std::uint64_t join_guard) {
  Tuples tuples(1);
  tuples[0] = std::move(selections.at(0));
  for (std::size_t k = 0; k < ast.joins.size(); ++k) {
    const JoinCondition& jc = ast.joins[k];
    const std::size_t right_t = k + 1;
    const std::size_t left_t = TableIndex(ast, jc.left.table);
    const Column& lcol = tables[left_t]->column(jc.left.name);
    const Column& rcol = tables[right_t]->column(jc.right.name);
    const std::vector<std::uint32_t>& rsel = selections.at(right_t);
    const std::vector<std::uint32_t>& lrows = tuples[left_t];
    const std::size_t nleft = lrows.size();

    // (left tuple index, right row) pairs in nested-loop order.
    std::vector<std::uint32_t> out_left;
    std::vector<std::uint32_t> out_right;

    if (algorithm == JoinAlgorithm::kNestedLoop) {
      const double pairs = static_cast<double>(nleft) * static_cast<double>(rsel.size());
      if (pairs > static_cast<double>(join_guard)) {
        throw Error(ErrorKind::kJoinGuard,
                    "nested-loop join of " + std::to_string(nleft) + " x " +
                        std::to_string(rsel.size()) +
                        " rows exceeds the join guard of " +
                        std::to_string(join_guard) + " pairs");
      }
      if (lcol.is_numeric() && rcol.is_numeric()) {
        std::vector<double> rv(rsel.size());
        for (std::size_t i = 0; i < rsel.size(); ++i) rv[i] = rcol.numbers()[rsel[i]];
        const auto& lnum = lcol.numbers();
        for (std::size_t t = 0; t < nleft; ++t) {
          const double key = lnum[lrows[t]];
          for (std::size_t i = 0; i < rv.size(); ++i) {
            if (rv[i] == key) {
              out_left.push_back(static_cast<std::uint32_t>(t));
              out_right.push_back(rsel[i]);
            }
          }
        }
      } else {
        std::vector<Value> rv;
        rv.reserve(rsel.size());
        for (auto r : rsel) rv.push_back(rcol.at(r));
        for (std::size_t t = 0; t < nleft; ++t) {
          const Value key = lcol.at(lrows[t]);
          for (std::size_t i = 0; i < rv.size(); ++i) {
            if (ValuesEqual(rv[i], key)) {
              out_left.push_back(static_cast<std::uint32_t>(t));
              out_right.push_back(rsel[i]);
            }
          }
        }
      }
    } else if (lcol.is_numeric() && rcol.is_numeric()) {
      std::unordered_map<double, std::vector<std::uint32_t>> index;
      index.reserve(rsel.size());
      for (auto r : rsel) index[NormalizeKey(rcol.numbers()[r])].push_back(r);
      const auto& lnum = lcol.numbers();
      for (std::size_t t = 0; t < nleft; ++t) {
        auto it = index.find(NormalizeKey(lnum[lrows[t]]));
        if (it == index.end()) continue;
        for (auto r : it->second) {
          out_left.push_back(static_cast<std::uint32_t>(t));
          out_right.push_back(r);
        }
      }
    } else {
      std::map<Value, std::vector<std::uint32_t>, ValueLess> index;
      for (auto r : rsel) index[rcol.at(r)].push_back(r);
      for (std::size_t t = 0; t < nleft; ++t) {
        auto it = index.find(lcol.at(lrows[t]));
        if (it == index.end()) continue;
        for (auto r : it->second) {
          out_left.push_back(static_cast<std::uint32_t>(t));
          out_right.push_back(r);
        }
      }
    }

    Tuples next(k + 2);
    for (std::size_t t = 0; t <= k; ++t) {
      next[t].reserve(out_left.size());
      for (auto li : out_left) next[t].push_back(tuples[t][li]);
    }
    next[right_t] = std::move(out_right);
    tuples = std::move(next);
  }
  return tuples;
}

ResultSet Project(const QueryAst& ast,
                  const std::vector<const BoundTable*>& tables,
                  const Tuples& tuples) {
  ResultSet rs;
  const std::size_t n = tuples.empty() ? 0 : tuples[0].size();
  if (ast.count) {
    rs.columns.push_back("count");
    rs.rows.push_back({static_cast<double>(n)});
    return rs;
  }
  std::size_t limit = n;
  if (ast.limit && *ast.limit < limit) limit = static_cast<std::size_t>(*ast.limit);
  struct Src {
    std::size_t table;
    const Column* column;
  };
  for (const auto& p : ast.projections) rs.columns.push_back(p.Qualified());
  if (limit == 0) return rs;
  std::vector<Src> srcs;
  for (const auto& p : ast.projections) {
    const std::size_t t = TableIndex(ast, p.table);
    srcs.push_back({t, &tables[t]->column(p.name)});
  }
  rs.rows.reserve(limit);
  for (std::size_t i = 0; i < limit; ++i) {
    std::vector<Value> row;
    row.reserve(srcs.size());
    for (const auto& s : srcs) row.push_back(s.column->at(tuples[s.table][i]));
    rs.rows.push_back(std::move(row));
  }
  return rs;
}

ResultSet Run(const QueryAst& ast, const std::vector<const BoundTable*>& tables,
              JoinAlgorithm algorithm, std::uint64_t join_guard,
              ExecStats& stats, const std::vector<bool>& empty_tables) {
  const bool single = ast.joins.empty();
  std::optional<std::size_t> stop_after;
  if (single && ast.limit && !ast.count) {
    stop_after = static_cast<std::size_t>(*ast.limit);
  }
  if (std::find(empty_tables.begin(), empty_tables.end(), true) != empty_tables.end()) {
    return Project(ast, tables, Tuples(tables.size()));
  }
  std::vector<std::vector<std::uint32_t>> selections;
  bool any_empty = false;
  for (std::size_t t = 0; t < tables.size(); ++t) {
    if (any_empty) {
      selections.emplace_back();
      continue;
    }
    std::uint64_t scanned = 0;
    selections.push_back(SelectRows(*tables[t], ast.PredicatesOfTable(ast.tables[t]),
                                    stop_after, scanned));
    stats.rows_scanned += scanned;
    if (stop_after && selections.back().size() >= *stop_after &&
        scanned < tables[t]->row_count) {
      stats.early_stop = true;
    }
    if (selections.back().empty()) any_empty = true;
  }
  if (any_empty) {
    for (auto& s : selections) s.clear();
    Tuples none(tables.size());
    return Project(ast, tables, none);
  }
  const Tuples tuples = Join(ast, tables, std::move(selections), algorithm, join_guard);
  return Project(ast, tables, tuples);
}

}  // namespace insitu::exec
