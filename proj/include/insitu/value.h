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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace insitu {

// A field value. Both engines apply the same rule when turning CSV text into
// values, so results from either engine compare equal.
using Value = std::variant<double, std::string>;

// Parses `text` as a finite number; the whole field must be consumed.
bool ParseNumber(std::string_view text, double& out);

// Number when the field parses as one, otherwise text.
Value ParseField(std::string_view field);

// Total order: numbers before text, numbers numerically, text bytewise.
int CompareValues(const Value& a, const Value& b);
bool ValuesEqual(const Value& a, const Value& b);

// Shortest representation that parses back to the same double.
std::string FormatNumber(double v);
std::string FormatValue(const Value& v);

// A fully parsed column. Numeric when every value parsed as a number.
class Column {
 public:
  Column() = default;
  explicit Column(std::vector<double> numbers) : data_(std::move(numbers)) {}
  explicit Column(std::vector<std::string> text) : data_(std::move(text)) {}

  // Builds the typed column from raw field texts (float-or-text rule).
  static Column FromFields(std::vector<std::string> fields);

  bool is_numeric() const { return data_.index() == 0; }
  std::size_t size() const;
  Value at(std::size_t row) const;

  const std::vector<double>& numbers() const { return std::get<0>(data_); }
  const std::vector<std::string>& text() const { return std::get<1>(data_); }

  // Cache accounting: 8 bytes per number; length plus an 8-byte prefix per
  // text value.
  std::uint64_t byte_size() const;

 private:
  std::variant<std::vector<double>, std::vector<std::string>> data_;
};

struct ResultSet {
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;

  bool operator==(const ResultSet&) const = default;

  // Multiset comparison of rows; column names must match.
  bool SameRows(const ResultSet& other) const;
  void WriteCsv(std::ostream& out) const;
};

}  // namespace insitu
