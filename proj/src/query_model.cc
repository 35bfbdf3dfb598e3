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

#include "insitu/query_model.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "insitu/error.h"

namespace insitu {

namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits one CSV record; returns false on an unterminated quote.
bool SplitCsvRecord(std::string_view line, std::vector<std::string>& fields) {
  fields.clear();
  std::string cur;
  bool quoted = false;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      if (!Trim(cur).empty()) return false;
      cur.clear();
      quoted = true;
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(quoted ? cur : std::string(Trim(cur)));
      cur.clear();
      quoted = false;
    } else if (quoted) {
      if (!std::isspace(static_cast<unsigned char>(c))) return false;
    } else {
      cur.push_back(c);
    }
  }
  if (in_quotes) return false;
  fields.push_back(quoted ? cur : std::string(Trim(cur)));
  return true;
}

}  // namespace

std::vector<WorkloadTask> ParseWorkload(std::string_view text) {
  std::vector<WorkloadTask> tasks;
  std::unordered_set<std::string> seen;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (Trim(line).empty()) continue;
    if (first) {
      first = false;
      if (Lower(Trim(line)) == "t_id,statement") continue;
    }
    if (!SplitCsvRecord(line, fields)) {
      throw FormatError(line_no, "unbalanced quotes");
    }
    if (fields.size() != 2) {
      throw FormatError(line_no, "expected 2 fields, found " + std::to_string(fields.size()));
    }
    WorkloadTask task{std::string(Trim(fields[0])), std::string(Trim(fields[1]))};
    if (task.task_id.empty()) throw FormatError(line_no, "empty task id");
    if (task.statement.empty()) throw FormatError(line_no, "empty statement");
    if (!seen.insert(task.task_id).second) {
      throw FormatError(line_no, "duplicate task id '" + task.task_id + "'");
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<WorkloadTask> ReadWorkloadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read workload file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseWorkload(ss.str());
}

const char* ComparatorSymbol(Comparator op) {
  switch (op) {
    case Comparator::kLt: return "<";
    case Comparator::kGt: return ">";
    case Comparator::kLe: return "<=";
    case Comparator::kGe: return ">=";
    case Comparator::kEq: return "=";
  }
  return "?";
}

const char* QueryKindName(QueryKind kind) {
  switch (kind) {
    case QueryKind::kSimple: return "simple";
    case QueryKind::kComplex: return "complex";
    case QueryKind::kSampling: return "sampling";
  }
  return "?";
}

std::vector<AttrRef> QueryAst::ReferencedAttrs() const {
  std::vector<AttrRef> out;
  auto add = [&](const AttrRef& a) {
    if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  };
  for (const auto& p : projections) add(p);
  if (count_arg) add(*count_arg);
  for (const auto& j : joins) {
    add(j.left);
    add(j.right);
  }
  for (const auto& p : predicates) add(p.attr);
  return out;
}

std::vector<AttrRef> QueryAst::AttrsOfTable(const std::string& table) const {
  std::vector<AttrRef> out;
  for (auto& a : ReferencedAttrs()) {
    if (a.table == table) out.push_back(a);
  }
  return out;
}

std::vector<Predicate> QueryAst::PredicatesOfTable(const std::string& table) const {
  std::vector<Predicate> out;
  for (const auto& p : predicates) {
    if (p.attr.table == table) out.push_back(p);
  }
  return out;
}

namespace {

enum class Tok { kIdent, kNumber, kString, kSymbol, kEnd };

struct Token {
  Tok type;
  std::string text;  // identifiers lower-cased; strings unescaped
  std::size_t offset;
};

std::vector<Token> Lex(std::string_view s) {
  std::vector<Token> toks;
  std::size_t i = 0;
  auto is_digit = [&](std::size_t k) {
    return k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]));
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      toks.push_back({Tok::kIdent, Lower(s.substr(start, i - start)), start});
    } else if (is_digit(i) ||
               ((c == '-' || c == '.') &&
                (is_digit(i + 1) ||
                 (c == '-' && i + 2 < s.size() && s[i + 1] == '.' && is_digit(i + 2))))) {
      const std::size_t start = i;
      if (s[i] == '-') ++i;
      while (is_digit(i)) ++i;
      if (i < s.size() && s[i] == '.') {
        ++i;
        while (is_digit(i)) ++i;
      }
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (is_digit(j)) {
          i = j;
          while (is_digit(i)) ++i;
        }
      }
      toks.push_back({Tok::kNumber, std::string(s.substr(start, i - start)), start});
    } else if (c == '\'') {
      const std::size_t start = i++;
      std::string text;
      bool closed = false;
      while (i < s.size()) {
        if (s[i] == '\'') {
          if (i + 1 < s.size() && s[i + 1] == '\'') {
            text.push_back('\'');
            i += 2;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        text.push_back(s[i++]);
      }
      if (!closed) throw ParseError(start, "unterminated string literal");
      toks.push_back({Tok::kString, std::move(text), start});
    } else if (c == '<' || c == '>') {
      const std::size_t start = i++;
      std::string sym(1, c);
      if (i < s.size() && s[i] == '=') {
        sym.push_back('=');
        ++i;
      }
      toks.push_back({Tok::kSymbol, sym, start});
    } else if (c == ',' || c == '.' || c == '(' || c == ')' || c == '*' || c == '=' || c == ';') {
      toks.push_back({Tok::kSymbol, std::string(1, c), i});
      ++i;
    } else {
      throw ParseError(i, std::string("unexpected character '") + c + "'");
    }
  }
  toks.push_back({Tok::kEnd, "", s.size()});
  return toks;
}

const std::unordered_set<std::string>& Keywords() {
  static const std::unordered_set<std::string> kw = {
      "select", "from", "join", "inner", "on", "where", "and", "limit",
      "count", "truncate", "table", "copy"};
  return kw;
}

// A reference as written, before resolution against the FROM list.
struct RawRef {
  std::string table;  // empty when unqualified
  std::string name;
  std::size_t offset;
};

class Parser {
 public:
  explicit Parser(std::string_view s) : toks_(Lex(s)) {}

  QueryAst Parse() {
    QueryAst ast;
    if (PeekKeyword("select")) {
      ParseSelect(ast);
    } else if (PeekKeyword("truncate")) {
      Next();
      ast.kind = StatementKind::kTruncate;
      if (PeekKeyword("table")) Next();
      ast.tables.push_back(ExpectIdent("table name"));
    } else if (PeekKeyword("copy")) {
      Next();
      ast.kind = StatementKind::kCopy;
      ast.tables.push_back(ExpectIdent("table name"));
      ExpectKeyword("from");
      if (Peek().type != Tok::kString) Fail("expected quoted file path");
      ast.copy_path = Next().text;
      // Load options (WITH (FORMAT csv, HEADER), CSV HEADER, ...) do not
      // change how the artifact reads files.
      while (Peek().type != Tok::kEnd && !PeekSymbol(";")) {
        if (PeekSymbol("(")) SkipBalanced();
        else Next();
      }
    } else {
      Fail("expected SELECT, TRUNCATE or COPY");
    }
    if (PeekSymbol(";")) Next();
    if (Peek().type != Tok::kEnd) Fail("unexpected trailing input");
    return ast;
  }

 private:
  void ParseSelect(QueryAst& ast) {
    Next();
    std::vector<RawRef> proj;
    std::optional<RawRef> count_arg;
    if (PeekKeyword("count")) {
      Next();
      ExpectSymbol("(");
      ast.count = true;
      if (PeekSymbol("*")) {
        Next();
      } else {
        count_arg = ParseRef();
      }
      ExpectSymbol(")");
    } else {
      proj.push_back(ParseRef());
      while (PeekSymbol(",")) {
        Next();
        proj.push_back(ParseRef());
      }
    }
    ExpectKeyword("from");
    std::vector<std::size_t> table_offsets;
    auto add_table = [&]() {
      const std::size_t off = Peek().offset;
      std::string t = ExpectIdent("table name");
      if (std::find(ast.tables.begin(), ast.tables.end(), t) != ast.tables.end()) {
        throw ParseError(off, "table '" + t + "' appears twice");
      }
      ast.tables.push_back(std::move(t));
    };
    add_table();
    std::vector<std::pair<RawRef, RawRef>> raw_joins;
    while (PeekKeyword("join") || PeekKeyword("inner")) {
      if (PeekKeyword("inner")) Next();
      ExpectKeyword("join");
      add_table();
      ExpectKeyword("on");
      RawRef l = ParseRef();
      ExpectSymbol("=");
      RawRef r = ParseRef();
      raw_joins.emplace_back(std::move(l), std::move(r));
    }
    std::vector<std::tuple<RawRef, Comparator, Value>> raw_preds;
    if (PeekKeyword("where")) {
      Next();
      do {
        RawRef ref = ParseRef();
        Comparator op = ParseComparator();
        Value lit = ParseLiteral();
        raw_preds.emplace_back(std::move(ref), op, std::move(lit));
      } while (PeekKeyword("and") && (Next(), true));
    }
    if (PeekKeyword("limit")) {
      Next();
      const Token& t = Peek();
      if (t.type != Tok::kNumber || t.text.find_first_not_of("0123456789") != std::string::npos) {
        Fail("LIMIT expects a non-negative integer");
      }
      const std::uint64_t n = std::stoull(Next().text);
      if (n == 0) throw Error(ErrorKind::kDomain, "LIMIT must be positive");
      ast.limit = n;
    }

    for (auto& r : proj) ast.projections.push_back(Resolve(r, ast.tables));
    if (count_arg) ast.count_arg = Resolve(*count_arg, ast.tables);
    for (std::size_t k = 0; k < raw_joins.size(); ++k) {
      const std::string& added = ast.tables[k + 1];
      AttrRef a = Resolve(raw_joins[k].first, ast.tables);
      AttrRef b = Resolve(raw_joins[k].second, ast.tables);
      auto earlier = [&](const AttrRef& x) {
        auto it = std::find(ast.tables.begin(), ast.tables.end(), x.table);
        return static_cast<std::size_t>(it - ast.tables.begin()) <= k;
      };
      if (b.table == added && earlier(a)) {
        ast.joins.push_back({a, b});
      } else if (a.table == added && earlier(b)) {
        ast.joins.push_back({b, a});
      } else {
        throw ParseError(raw_joins[k].first.offset,
                         "join condition must link '" + added + "' to an earlier table");
      }
    }
    for (auto& [ref, op, lit] : raw_preds) {
      ast.predicates.push_back({Resolve(ref, ast.tables), op, std::move(lit)});
    }
  }

  AttrRef Resolve(const RawRef& r, const std::vector<std::string>& tables) {
    if (!r.table.empty()) {
      if (std::find(tables.begin(), tables.end(), r.table) == tables.end()) {
        throw ParseError(r.offset, "unknown table '" + r.table + "'");
      }
      return {r.table, r.name};
    }
    // Bare names bind to the first FROM table.
    return {tables.front(), r.name};
  }

  RawRef ParseRef() {
    const std::size_t off = Peek().offset;
    std::string first = ExpectIdent("attribute");
    if (PeekSymbol(".")) {
      Next();
      std::string second = ExpectIdent("attribute");
      return {std::move(first), std::move(second), off};
    }
    return {"", std::move(first), off};
  }

  Comparator ParseComparator() {
    const Token& t = Peek();
    if (t.type == Tok::kSymbol) {
      if (t.text == "<") return Next(), Comparator::kLt;
      if (t.text == ">") return Next(), Comparator::kGt;
      if (t.text == "<=") return Next(), Comparator::kLe;
      if (t.text == ">=") return Next(), Comparator::kGe;
      if (t.text == "=") return Next(), Comparator::kEq;
    }
    Fail("expected comparator");
  }

  Value ParseLiteral() {
    const Token& t = Peek();
    if (t.type == Tok::kNumber) {
      double v;
      if (!ParseNumber(t.text, v)) Fail("malformed number");
      Next();
      return v;
    }
    if (t.type == Tok::kString) return Next().text;
    Fail("expected literal");
  }

  void SkipBalanced() {
    int depth = 0;
    do {
      const Token& t = Peek();
      if (t.type == Tok::kEnd) Fail("unbalanced parentheses");
      if (t.type == Tok::kSymbol && t.text == "(") ++depth;
      if (t.type == Tok::kSymbol && t.text == ")") --depth;
      Next();
    } while (depth > 0);
  }

  const Token& Peek() const { return toks_[pos_]; }
  const Token& Next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  bool PeekKeyword(const char* kw) const {
    return Peek().type == Tok::kIdent && Peek().text == kw;
  }
  bool PeekSymbol(const char* sym) const {
    return Peek().type == Tok::kSymbol && Peek().text == sym;
  }
  void ExpectKeyword(const char* kw) {
    if (!PeekKeyword(kw)) Fail(std::string("expected ") + kw);
    Next();
  }
  void ExpectSymbol(const char* sym) {
    if (!PeekSymbol(sym)) Fail(std::string("expected '") + sym + "'");
    Next();
  }
  std::string ExpectIdent(const char* what) {
    const Token& t = Peek();
    if (t.type != Tok::kIdent || Keywords().count(t.text)) {
      Fail(std::string("expected ") + what);
    }
    return Next().text;
  }

  [[noreturn]] void Fail(const std::string& msg) const {
    throw ParseError(Peek().offset, msg);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

std::string RenderLiteral(const Value& v) {
  if (v.index() == 0) return FormatNumber(std::get<0>(v));
  std::string out = "'";
  for (char c : std::get<1>(v)) {
    if (c == '\'') out.push_back('\'');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

QueryAst ParseQuery(std::string_view statement) {
  return Parser(statement).Parse();
}

std::string Render(const QueryAst& ast) {
  std::ostringstream out;
  switch (ast.kind) {
    case StatementKind::kTruncate:
      out << "TRUNCATE TABLE " << ast.tables.at(0);
      return out.str();
    case StatementKind::kCopy:
      out << "COPY " << ast.tables.at(0) << " FROM "
          << RenderLiteral(ast.copy_path);
      return out.str();
    case StatementKind::kSelect:
      break;
  }
  out << "SELECT ";
  if (ast.count) {
    out << "COUNT(" << (ast.count_arg ? ast.count_arg->Qualified() : "*") << ")";
  } else {
    for (std::size_t i = 0; i < ast.projections.size(); ++i) {
      out << (i ? ", " : "") << ast.projections[i].Qualified();
    }
  }
  out << " FROM " << ast.tables.at(0);
  for (std::size_t k = 0; k < ast.joins.size(); ++k) {
    out << " JOIN " << ast.tables.at(k + 1) << " ON "
        << ast.joins[k].left.Qualified() << " = "
        << ast.joins[k].right.Qualified();
  }
  for (std::size_t i = 0; i < ast.predicates.size(); ++i) {
    const auto& p = ast.predicates[i];
    out << (i ? " AND " : " WHERE ") << p.attr.Qualified() << " "
        << ComparatorSymbol(p.op) << " " << RenderLiteral(p.literal);
  }
  if (ast.limit) out << " LIMIT " << *ast.limit;
  return out.str();
}

QueryClass Classify(const QueryAst& ast) {
  QueryClass c;
  if (ast.is_load()) return c;
  c.join_count = ast.joins.size();
  c.is_sampling = ast.limit.has_value();
  for (const auto& a : ast.ReferencedAttrs()) c.attrs.insert(a.Qualified());
  if (c.join_count >= 1) {
    c.kind = QueryKind::kComplex;
  } else if (c.is_sampling) {
    c.kind = QueryKind::kSampling;
  } else {
    c.kind = QueryKind::kSimple;
  }
  return c;
}

}  // namespace insitu
