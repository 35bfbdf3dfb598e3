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

#include <cctype>
#include <regex>
#include <set>

#include "insitu/error.h"
#include "insitu/query_model.h"
#include "query_gen.h"
#include "test_util.h"

namespace insitu {
namespace {

constexpr const char* kTableOne =
    "T_ID,Statement\n"
    "TRUN,\"TRUNCATE TABLE PhotoPrimary;\"\n"
    "COPY,\"COPY PhotoPrimary FROM '/data/PhotoPrimary.csv' (DELIMITER ',');\"\n"
    "Q0,\"Select count(objid) from PhotoPrimary;\"\n"
    "Q1,\"SELECT objID, ra ,dec FROM PhotoPrimary WHERE ra > 185 and ra < 185.1 AND dec > 56.2 "
    "and dec < 56.3 limit 100;\"\n";

TEST(ParseWorkload, TableOneWorkload) {
  auto tasks = ParseWorkload(kTableOne);
  ASSERT_EQ(tasks.size(), 4u);
  EXPECT_EQ(tasks[0].task_id, "TRUN");
  EXPECT_EQ(tasks[1].task_id, "COPY");
  EXPECT_EQ(tasks[2].task_id, "Q0");
  EXPECT_EQ(tasks[2].statement, "Select count(objid) from PhotoPrimary;");
  EXPECT_EQ(tasks[3].task_id, "Q1");
}

TEST(ParseWorkload, HeaderOnlyIsEmpty) {
  EXPECT_TRUE(ParseWorkload("T_ID,Statement\n").empty());
  EXPECT_TRUE(ParseWorkload("").empty());
}

TEST(ParseWorkload, DuplicateIdIsFormatError) {
  try {
    ParseWorkload("T_ID,Statement\nQ1,\"SELECT a FROM t\"\nQ1,\"SELECT b FROM t\"\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.kind(), ErrorKind::kFormat);
  }
}

TEST(ParseWorkload, UnbalancedQuotesNameTheLine) {
  try {
    ParseWorkload("T_ID,Statement\nQ0,\"SELECT a FROM t\"\nQ1,\"SELECT b FROM t\n");
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(ParseWorkload, DoubledQuotesAndBlankLines) {
  auto tasks = ParseWorkload(
      "T_ID,Statement\r\n\r\nQ0,\"SELECT a FROM t WHERE b = \"\"x,y\"\"\"\r\n");
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].statement, "SELECT a FROM t WHERE b = \"x,y\"");
}

TEST(ParseWorkload, MissingFieldsRejected) {
  EXPECT_THROW(ParseWorkload("T_ID,Statement\nQ0\n"), FormatError);
  EXPECT_THROW(ParseWorkload("T_ID,Statement\n,\"SELECT a FROM t\"\n"), FormatError);
  EXPECT_THROW(ParseWorkload("T_ID,Statement\nQ0,\"\"\n"), FormatError);
}

TEST(ParseQuery, TableOneQ1) {
  auto ast = ParseQuery(
      "SELECT objID, ra ,dec FROM PhotoPrimary WHERE ra > 185 and ra < 185.1 AND dec > 56.2 "
      "and dec < 56.3 limit 100");
  EXPECT_EQ(ast.kind, StatementKind::kSelect);
  ASSERT_EQ(ast.projections.size(), 3u);
  EXPECT_EQ(ast.projections[0].name, "objid");
  EXPECT_EQ(ast.projections[0].table, "photoprimary");
  EXPECT_EQ(ast.predicates.size(), 4u);
  EXPECT_EQ(ast.predicates[1].op, Comparator::kLt);
  EXPECT_EQ(std::get<double>(ast.predicates[1].literal), 185.1);
  ASSERT_TRUE(ast.limit.has_value());
  EXPECT_EQ(*ast.limit, 100u);
  EXPECT_TRUE(ast.joins.empty());
}

TEST(ParseQuery, MinimalSelect) {
  auto ast = ParseQuery("SELECT a FROM t");
  ASSERT_EQ(ast.projections.size(), 1u);
  EXPECT_EQ(ast.projections[0].Qualified(), "t.a");
  EXPECT_TRUE(ast.predicates.empty());
  EXPECT_FALSE(ast.limit.has_value());
  EXPECT_FALSE(ast.count);
}

TEST(ParseQuery, TwoJoins) {
  auto ast = ParseQuery("SELECT a FROM t JOIN u ON t.k=u.k JOIN v ON u.m=v.m");
  EXPECT_EQ(ast.joins.size(), 2u);
  EXPECT_EQ(ast.tables, (std::vector<std::string>{"t", "u", "v"}));
  EXPECT_EQ(ast.joins.size(), ast.tables.size() - 1);
}

TEST(ParseQuery, JoinConditionIsNormalizedToFromOrder) {
  auto ast = ParseQuery("SELECT t.a FROM t JOIN u ON u.k = t.k");
  ASSERT_EQ(ast.joins.size(), 1u);
  EXPECT_EQ(ast.joins[0].left.Qualified(), "t.k");
  EXPECT_EQ(ast.joins[0].right.Qualified(), "u.k");
}

TEST(ParseQuery, CountForms) {
  auto a = ParseQuery("select COUNT(*) from t");
  EXPECT_TRUE(a.count);
  EXPECT_FALSE(a.count_arg.has_value());
  auto b = ParseQuery("Select count(objid) from PhotoPrimary;");
  EXPECT_TRUE(b.count);
  ASSERT_TRUE(b.count_arg.has_value());
  EXPECT_EQ(b.count_arg->Qualified(), "photoprimary.objid");
}

TEST(ParseQuery, StringAndNegativeLiterals) {
  auto ast = ParseQuery("SELECT a FROM t WHERE b = 'x y' AND c >= -3.5e2");
  ASSERT_EQ(ast.predicates.size(), 2u);
  EXPECT_EQ(std::get<std::string>(ast.predicates[0].literal), "x y");
  EXPECT_EQ(std::get<double>(ast.predicates[1].literal), -350.0);
}

TEST(ParseQuery, LoadStatements) {
  auto trunc = ParseQuery("TRUNCATE TABLE PhotoPrimary;");
  EXPECT_EQ(trunc.kind, StatementKind::kTruncate);
  EXPECT_EQ(trunc.tables, std::vector<std::string>{"photoprimary"});
  EXPECT_TRUE(trunc.is_load());
  auto copy = ParseQuery("COPY PhotoPrimary FROM '/data/p.csv' (DELIMITER ',');");
  EXPECT_EQ(copy.kind, StatementKind::kCopy);
  EXPECT_EQ(copy.copy_path, "/data/p.csv");
  auto copy2 = ParseQuery("copy t from 'x.csv' WITH (FORMAT csv, HEADER)");
  EXPECT_EQ(copy2.copy_path, "x.csv");
}

TEST(ParseQuery, SyntaxErrorsCarryOffsets) {
  try {
    ParseQuery("SELECT a FROM t WHERE");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 21u);
  }
  try {
    ParseQuery("SELECT a FRM t");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 9u);
  }
  EXPECT_THROW(ParseQuery("DELETE FROM t"), ParseError);
  EXPECT_THROW(ParseQuery("SELECT a FROM t ORDER BY a"), ParseError);
  EXPECT_THROW(ParseQuery("SELECT a FROM t WHERE a > 1 OR a < 0"), ParseError);
  EXPECT_THROW(ParseQuery("SELECT a FROM t WHERE a > 'unterminated"), ParseError);
}

TEST(ParseQuery, LimitZeroIsDomainError) {
  try {
    ParseQuery("SELECT a FROM t LIMIT 0");
    FAIL() << "expected domain error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDomain);
  }
}

TEST(ParseQuery, AttributeQualificationRules) {
  auto bare = ParseQuery("SELECT a FROM t JOIN u ON t.k = u.k WHERE b > 1");
  EXPECT_EQ(bare.projections[0].Qualified(), "t.a");
  EXPECT_EQ(bare.predicates[0].attr.Qualified(), "t.b");
  EXPECT_THROW(ParseQuery("SELECT t.a FROM t JOIN u ON k = j"), ParseError);
  EXPECT_THROW(ParseQuery("SELECT x.a FROM t"), ParseError);
  EXPECT_THROW(ParseQuery("SELECT t.a FROM t JOIN t ON t.k = t.k"), Error);
  EXPECT_THROW(ParseQuery("SELECT t.a FROM t JOIN u ON t.k = t.j"), ParseError);
  EXPECT_NO_THROW(ParseQuery("SELECT T.A FROM t"));
}

TEST(Classify, TableOneExamples) {
  auto q1 = Classify(ParseQuery(
      "SELECT objID, ra ,dec FROM PhotoPrimary WHERE ra > 185 and ra < 185.1 limit 100"));
  EXPECT_EQ(q1.join_count, 0u);
  EXPECT_TRUE(q1.is_sampling);
  EXPECT_EQ(q1.kind, QueryKind::kSampling);
  EXPECT_EQ(q1.attrs, (std::set<std::string>{"photoprimary.objid", "photoprimary.ra",
                                             "photoprimary.dec"}));

  auto q0 = Classify(ParseQuery("SELECT count(objid) FROM PhotoPrimary"));
  EXPECT_EQ(q0.join_count, 0u);
  EXPECT_FALSE(q0.is_sampling);
  EXPECT_EQ(q0.kind, QueryKind::kSimple);

  auto j2 = Classify(ParseQuery("SELECT t.a FROM t JOIN u ON t.k=u.k JOIN v ON u.m=v.m"));
  EXPECT_EQ(j2.join_count, 2u);
  EXPECT_EQ(j2.kind, QueryKind::kComplex);
  EXPECT_EQ(j2.attrs, (std::set<std::string>{"t.a", "t.k", "u.k", "u.m", "v.m"}));
}

TEST(Classify, LimitedJoinIsComplex) {
  auto c = Classify(ParseQuery("SELECT t.a FROM t JOIN u ON t.k=u.k LIMIT 5"));
  EXPECT_TRUE(c.is_sampling);
  EXPECT_EQ(c.kind, QueryKind::kComplex);
}

std::vector<testing::GenTable> CorpusTables() {
  return {{"t", {"objid", "ra", "dec", "c03", "c04", "c05"}, 1000},
          {"d1", {"objid", "ra", "dec", "c03"}, 100},
          {"d2", {"objid", "dec", "c03"}, 100}};
}

// Identifiers in the text minus keywords and table names;
// bare names belong to the first FROM table.
std::set<std::string> BruteForceAttrs(const std::string& sql) {
  static const std::set<std::string> kKeywords = {"select", "from", "where", "and", "join",
                                                  "inner", "on", "limit", "count"};
  std::string lower = sql;
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::set<std::string> tables;
  std::string first_table;
  static const std::regex kTable(R"((?:from|join)\s+([a-z_][a-z0-9_]*))");
  for (std::sregex_iterator it(lower.begin(), lower.end(), kTable), end; it != end; ++it) {
    if (tables.empty()) first_table = (*it)[1];
    tables.insert((*it)[1]);
  }
  static const std::regex kIdent(R"(([a-z_][a-z0-9_]*)(\.[a-z_][a-z0-9_]*)?)");
  std::set<std::string> attrs;
  for (std::sregex_iterator it(lower.begin(), lower.end(), kIdent), end; it != end; ++it) {
    // Skip matches inside numeric literals such as 1e5.
    const auto pos = static_cast<std::size_t>(it->position());
    if (pos > 0 && (std::isdigit(static_cast<unsigned char>(lower[pos - 1])) ||
                    lower[pos - 1] == '.')) {
      continue;
    }
    std::string whole = (*it)[0];
    if ((*it)[2].matched) {
      attrs.insert(whole);
    } else if (!kKeywords.count(whole) && !tables.count(whole)) {
      attrs.insert(first_table + "." + whole);
    }
  }
  return attrs;
}

TEST(QueryCorpus, RenderIsAParseFixedPoint) {
  testing::QueryGen gen(CorpusTables(), 11);
  for (int i = 0; i < 1000; ++i) {
    const std::string sql = gen.Next();
    SCOPED_TRACE(sql);
    const QueryAst ast = ParseQuery(sql);
    const std::string rendered = Render(ast);
    const QueryAst again = ParseQuery(rendered);
    EXPECT_EQ(again, ast);
    EXPECT_EQ(Render(again), rendered);
  }
}

TEST(QueryCorpus, AttrsMatchBruteForceAndInvariantsHold) {
  testing::QueryGen gen(CorpusTables(), 12);
  for (int i = 0; i < 1000; ++i) {
    const std::string sql = gen.Next();
    SCOPED_TRACE(sql);
    const QueryAst ast = ParseQuery(sql);
    const QueryClass c = Classify(ast);
    EXPECT_EQ(c, Classify(ast));
    EXPECT_EQ(c.attrs, BruteForceAttrs(sql));
    EXPECT_EQ(c.join_count, ast.joins.size());
    if (ast.tables.size() >= 2) {
      EXPECT_EQ(ast.joins.size(), ast.tables.size() - 1);
    }
    EXPECT_EQ(c.kind == QueryKind::kComplex, c.join_count >= 1);
    EXPECT_EQ(c.kind == QueryKind::kSimple, c.join_count == 0 && !c.is_sampling);
    if (c.kind == QueryKind::kSampling) {
      EXPECT_TRUE(c.join_count == 0 && c.is_sampling);
    }
    for (const auto& a : ast.ReferencedAttrs()) {
      EXPECT_NE(std::find(ast.tables.begin(), ast.tables.end(), a.table), ast.tables.end());
    }
  }
}

TEST(ReadWorkloadFile, MissingFileIsIoError) {
  testing::TempDir dir;
  try {
    ReadWorkloadFile(dir.Path("nope.csv"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
  testing::WriteFile(dir.Path("w.csv"), kTableOne);
  EXPECT_EQ(ReadWorkloadFile(dir.Path("w.csv")).size(), 4u);
}

}  // namespace
}  // namespace insitu
