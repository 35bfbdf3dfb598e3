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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "insitu/csv.h"
#include "insitu/error.h"
#include "insitu/value.h"
#include "test_util.h"

namespace insitu {
namespace {

TEST(Value, ParseNumberRequiresWholeField) {
  double v;
  EXPECT_TRUE(ParseNumber("185.1", v));
  EXPECT_DOUBLE_EQ(v, 185.1);
  EXPECT_TRUE(ParseNumber("-3e2", v));
  EXPECT_DOUBLE_EQ(v, -300);
  EXPECT_FALSE(ParseNumber("12abc", v));
  EXPECT_FALSE(ParseNumber("", v));
  EXPECT_FALSE(ParseNumber("nan", v));
  EXPECT_FALSE(ParseNumber("inf", v));
  EXPECT_EQ(ParseField("abc"), Value(std::string("abc")));
  EXPECT_EQ(ParseField("7"), Value(7.0));
}

TEST(Value, FormatNumberRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    double back;
    ASSERT_TRUE(ParseNumber(FormatNumber(x), back));
    EXPECT_EQ(back, x);
  }
  EXPECT_EQ(FormatNumber(-0.0), "0");
  EXPECT_EQ(FormatNumber(1237645879000.0), "1237645879000");
}

TEST(Value, TotalOrder) {
  EXPECT_LT(CompareValues(Value(5.0), Value(std::string("a"))), 0);
  EXPECT_LT(CompareValues(Value(2.0), Value(10.0)), 0);
  EXPECT_GT(CompareValues(Value(std::string("b")), Value(std::string("a"))), 0);
  EXPECT_TRUE(ValuesEqual(Value(1.0), Value(1.0)));
}

TEST(Column, TypingAndSizes) {
  Column n = Column::FromFields({"1", "2.5"});
  EXPECT_TRUE(n.is_numeric());
  EXPECT_EQ(n.byte_size(), 16u);
  Column t = Column::FromFields({"1", "x"});
  EXPECT_FALSE(t.is_numeric());
  EXPECT_EQ(t.at(0), Value(1.0));  // value-level typing inside a text column
  EXPECT_EQ(t.at(1), Value(std::string("x")));
  EXPECT_EQ(t.byte_size(), 8u + 1 + 8u + 1);
}

TEST(ResultSet, SameRowsIsMultisetEquality) {
  ResultSet a{{"x"}, {{Value(1.0)}, {Value(2.0)}, {Value(2.0)}}};
  ResultSet b{{"x"}, {{Value(2.0)}, {Value(1.0)}, {Value(2.0)}}};
  ResultSet c{{"x"}, {{Value(2.0)}, {Value(1.0)}, {Value(1.0)}}};
  ResultSet d{{"y"}, b.rows};
  EXPECT_TRUE(a.SameRows(b));
  EXPECT_FALSE(a.SameRows(c));
  EXPECT_FALSE(b.SameRows(d));
  std::ostringstream out;
  a.WriteCsv(out);
  EXPECT_EQ(out.str(), "x\n1\n2\n2\n");
}

TEST(Csv, SplitAndHeader) {
  std::vector<std::string_view> f;
  SplitFields("a,,c", f);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(ParseHeader(" ObjID , RA,dec\r"), (std::vector<std::string>{"objid", "ra", "dec"}));
}

TEST(Csv, SplitPrefixCountsEveryField) {
  std::vector<std::string_view> f;
  for (const char* line : {"", "a", "a,,c", "a,b,c,d,", ",,,"}) {
    std::vector<std::string_view> all;
    SplitFields(line, all);
    for (std::size_t n = 0; n <= all.size() + 1; ++n) {
      EXPECT_EQ(SplitFieldsPrefix(line, n, f), all.size()) << line << " n=" << n;
      ASSERT_EQ(f.size(), std::min(n, all.size()));
      for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], all[i]);
    }
  }
}

TEST(Csv, LineReaderOffsetsAcrossBlocks) {
  testing::TempDir dir;
  std::string text;
  std::vector<std::uint64_t> starts;
  for (int i = 0; i < 500; ++i) {
    starts.push_back(text.size());
    text += "line" + std::to_string(i) + (i % 3 == 0 ? "\r\n" : "\n");
  }
  text += "tail";  // no terminator
  starts.push_back(text.size() - 4);
  testing::WriteFile(dir.Path("l.txt"), text);
  LineReader reader(dir.Path("l.txt"), 64);
  std::string_view line;
  std::uint64_t begin;
  std::size_t i = 0;
  while (reader.Next(line, begin)) {
    ASSERT_LT(i, starts.size());
    EXPECT_EQ(begin, starts[i]);
    EXPECT_EQ(line.find('\r'), std::string_view::npos);
    ++i;
  }
  EXPECT_EQ(i, starts.size());
  EXPECT_EQ(reader.consumed(), text.size());
  EXPECT_EQ(FileSize(dir.Path("l.txt")), text.size());
}

}  // namespace
}  // namespace insitu
