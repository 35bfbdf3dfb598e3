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

#include "insitu/value.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

namespace insitu {

bool ParseNumber(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char c = text.front();
  if (!((c >= '0' && c <= '9') || c == '-' || c == '.')) return false;
  double v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) return false;
  if (!std::isfinite(v)) return false;
  out = v;
  return true;
}

Value ParseField(std::string_view field) {
  double v;
  if (ParseNumber(field, v)) return v;
  return std::string(field);
}

int CompareValues(const Value& a, const Value& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (a.index() == 0) {
    const double x = std::get<0>(a);
    const double y = std::get<0>(b);
    return x < y ? -1 : (y < x ? 1 : 0);
  }
  const int c = std::get<1>(a).compare(std::get<1>(b));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

bool ValuesEqual(const Value& a, const Value& b) {
  return CompareValues(a, b) == 0;
}

std::string FormatNumber(double v) {
  if (v == 0) v = 0;  // folds -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string FormatValue(const Value& v) {
  if (v.index() == 0) return FormatNumber(std::get<0>(v));
  return std::get<1>(v);
}

Column Column::FromFields(std::vector<std::string> fields) {
  std::vector<double> numbers;
  numbers.reserve(fields.size());
  for (const auto& f : fields) {
    double v;
    if (!ParseNumber(f, v)) return Column(std::move(fields));
    numbers.push_back(v);
  }
  return Column(std::move(numbers));
}

std::size_t Column::size() const {
  return is_numeric() ? numbers().size() : text().size();
}

Value Column::at(std::size_t row) const {
  if (is_numeric()) return numbers()[row];
  return ParseField(text()[row]);
}

std::uint64_t Column::byte_size() const {
  if (is_numeric()) return 8 * numbers().size();
  std::uint64_t total = 0;
  for (const auto& s : text()) total += 8 + s.size();
  return total;
}

namespace {

bool RowLess(const std::vector<Value>& a, const std::vector<Value>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const int c = CompareValues(a[i], b[i]);
    if (c != 0) return c < 0;
  }
  return a.size() < b.size();
}

}  // namespace

bool ResultSet::SameRows(const ResultSet& other) const {
  if (columns != other.columns || rows.size() != other.rows.size()) {
    return false;
  }
  auto lhs = rows;
  auto rhs = other.rows;
  std::sort(lhs.begin(), lhs.end(), RowLess);
  std::sort(rhs.begin(), rhs.end(), RowLess);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    if (lhs[i].size() != rhs[i].size()) return false;
    for (std::size_t j = 0; j < lhs[i].size(); ++j) {
      if (!ValuesEqual(lhs[i][j], rhs[i][j])) return false;
    }
  }
  return true;
}

void ResultSet::WriteCsv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    out << (i ? "," : "") << columns[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << FormatValue(row[i]);
    }
    out << '\n';
  }
}

}  // namespace insitu
