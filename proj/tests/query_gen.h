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
#include <random>
#include <string>
#include <vector>

#include "insitu/gen_data.h"

namespace insitu::testing {

// Value range of a generated column, by name (see GenerateCsv).
struct ColumnRange {
  double lo;
  double hi;
  bool integral;
};

inline ColumnRange RangeOf(const std::string& col, std::uint64_t rows) {
  if (col == "objid") {
    return {static_cast<double>(kObjidBase), static_cast<double>(kObjidBase + rows), true};
  }
  if (col == "ra") return {0, 360, false};
  if (col == "dec") return {-90, 90, false};
  const int idx = std::stoi(col.substr(1));
  switch (idx % 4) {
    case 0: return {0, 1000, false};
    case 1: return {20, 80, false};
    case 2: return {0, 100, false};
    default: return {0, 99, true};
  }
}

struct GenTable {
  std::string name;
  std::vector<std::string> columns;
  std::uint64_t rows;
};

struct QueryGenOptions {
  int max_joins = 2;
  double limit_probability = 0.3;
  // Probability that an unqualified form is used for single-table queries.
  double unqualified_probability = 0.5;
  // Joined queries get one range predicate on the first table no wider than
  // this fraction of its range, bounding nested-loop work.
  double join_selectivity = 0.05;
};

// Random statement in the supported subset over `tables` (tables[0] is the
// fact table; later tables join on objid or on the small-integer c03).
class QueryGen {
 public:
  QueryGen(std::vector<GenTable> tables, std::uint64_t seed, QueryGenOptions opts = {})
      : tables_(std::move(tables)), rng_(seed), opts_(opts) {}

  std::string Next() {
    const int joins = static_cast<int>(
        Pick(static_cast<std::uint64_t>(std::min<int>(opts_.max_joins,
                                                      static_cast<int>(tables_.size()) - 1)) + 1));
    std::vector<const GenTable*> used;
    for (int i = 0; i <= joins; ++i) used.push_back(&tables_[i]);
    const bool qualify = joins > 0 || Uniform() >= opts_.unqualified_probability;
    auto ref = [&](const GenTable& t, const std::string& c) {
      return qualify ? t.name + "." + c : c;
    };

    std::string sql = "SELECT ";
    const double shape = Uniform();
    if (shape < 0.2) {
      sql += "COUNT(*)";
    } else if (shape < 0.3) {
      const GenTable& t = *used[Pick(used.size())];
      sql += "count(" + ref(t, t.columns[Pick(t.columns.size())]) + ")";
    } else {
      const std::size_t n = 1 + Pick(3);
      for (std::size_t i = 0; i < n; ++i) {
        const GenTable& t = *used[Pick(used.size())];
        if (i) sql += ", ";
        sql += ref(t, t.columns[Pick(t.columns.size())]);
      }
    }
    sql += " FROM " + used[0]->name;
    for (int j = 1; j <= joins; ++j) {
      const GenTable& right = *used[j];
      const GenTable& left = *used[Pick(static_cast<std::uint64_t>(j))];
      const std::string key = Uniform() < 0.6 ? "objid" : "c03";
      sql += Uniform() < 0.5 ? " JOIN " : " inner join ";
      sql += right.name + " ON ";
      if (Uniform() < 0.5) {
        sql += left.name + "." + key + " = " + right.name + "." + key;
      } else {
        sql += right.name + "." + key + "=" + left.name + "." + key;
      }
    }

    std::vector<std::string> preds;
    if (joins > 0) {
      const GenTable& t = *used[0];
      const std::string col = t.columns.size() > 1 ? t.columns[1] : t.columns[0];
      const ColumnRange r = RangeOf(col, t.rows);
      const double width = (r.hi - r.lo) * opts_.join_selectivity * Uniform();
      const double lo = r.lo + (r.hi - r.lo - width) * Uniform();
      preds.push_back(ref(t, col) + " >= " + Literal(lo, false));
      preds.push_back(ref(t, col) + " < " + Literal(lo + width, false));
    }
    const std::size_t extra = Pick(3);
    for (std::size_t i = 0; i < extra; ++i) {
      const GenTable& t = *used[Pick(used.size())];
      const std::string& col = t.columns[Pick(t.columns.size())];
      const ColumnRange r = RangeOf(col, t.rows);
      static const char* kOps[] = {"<", ">", "<=", ">=", "="};
      const char* op = kOps[Pick(r.integral ? 5 : 4)];
      const double v = r.lo + (r.hi - r.lo) * Uniform();
      preds.push_back(ref(t, col) + " " + op + " " + Literal(v, r.integral));
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      sql += i == 0 ? " WHERE " : (Uniform() < 0.5 ? " AND " : " and ");
      sql += preds[i];
    }
    if (Uniform() < opts_.limit_probability) sql += " LIMIT " + std::to_string(1 + Pick(50));
    if (Uniform() < 0.3) sql += ";";
    return sql;
  }

 private:
  std::uint64_t Pick(std::uint64_t n) { return n == 0 ? 0 : rng_() % n; }
  double Uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  static std::string Literal(double v, bool integral) {
    char buf[64];
    if (integral) std::snprintf(buf, sizeof buf, "%.0f", std::floor(v));
    else std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
  }

  std::vector<GenTable> tables_;
  std::mt19937_64 rng_;
  QueryGenOptions opts_;
};

}  // namespace insitu::testing
