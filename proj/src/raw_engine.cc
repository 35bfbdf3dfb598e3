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

#include "insitu/raw_engine.h"

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "insitu/csv.h"
#include "insitu/error.h"

namespace insitu {

namespace {

// Accumulates one column during a scan. Starts numeric and switches to text
// at the first non-numeric field; earlier numbers are re-rendered, which
// keeps their values under the float-or-text rule.
class ColumnBuilder {
 public:
  Value Add(std::string_view field) {
    double v;
    if (numeric_) {
      if (ParseNumber(field, v)) {
        numbers_.push_back(v);
        bytes_ += 8;
        return v;
      }
      SwitchToText();
    }
    text_.emplace_back(field);
    bytes_ += 8 + field.size();
    return ParseField(field);
  }

  std::uint64_t bytes() const { return bytes_; }

  std::shared_ptr<const Column> Finish() {
    if (numeric_) return std::make_shared<const Column>(std::move(numbers_));
    return std::make_shared<const Column>(std::move(text_));
  }

 private:
  void SwitchToText() {
    numeric_ = false;
    bytes_ = 0;
    text_.reserve(numbers_.size());
    for (double d : numbers_) {
      text_.push_back(FormatNumber(d));
      bytes_ += 8 + text_.back().size();
    }
    numbers_.clear();
    numbers_.shrink_to_fit();
  }

  bool numeric_ = true;
  std::vector<double> numbers_;
  std::vector<std::string> text_;
  std::uint64_t bytes_ = 0;
};

std::vector<std::string> UniqueNames(const std::vector<AttrRef>& attrs) {
  std::vector<std::string> out;
  for (const auto& a : attrs) {
    if (std::find(out.begin(), out.end(), a.name) == out.end()) out.push_back(a.name);
  }
  return out;
}

std::size_t HeaderIndex(const std::vector<std::string>& header,
                        const std::string& attr, const std::string& path) {
  auto it = std::find(header.begin(), header.end(), attr);
  if (it == header.end()) {
    throw Error(ErrorKind::kSchema, "attribute '" + attr + "' not in header of " + path);
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::string ReadHeader(LineReader& reader, const std::string& path,
                       std::vector<std::string>& header) {
  std::string_view line;
  std::uint64_t begin;
  if (!reader.Next(line, begin)) throw FormatError(1, path + ": missing header row");
  header = ParseHeader(line);
  return std::string(line);
}

[[noreturn]] void ThrowRagged(std::size_t line_no, std::size_t got,
                              std::size_t want, const std::string& path) {
  throw FormatError(line_no, path + ": row has " + std::to_string(got) +
                                 " fields, expected " + std::to_string(want));
}

[[noreturn]] void ThrowBudget(std::uint64_t needed, std::uint64_t budget,
                              bool at_least) {
  throw Error(ErrorKind::kBudgetExceeded,
              std::string("query working set requires ") +
                  (at_least ? "at least " : "") + std::to_string(needed) +
                  " bytes, cache budget is " + std::to_string(budget) +
                  " bytes");
}

std::int64_t MtimeNs(const std::string& path) {
  std::error_code ec;
  auto t = std::filesystem::last_write_time(path, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot stat " + path + ": " + ec.message());
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t.time_since_epoch()).count();
}

}  // namespace

PositionalMap BuildPositionalMap(const std::string& path) {
  PositionalMap map;
  map.file = path;
  map.file_size = FileSize(path);
  map.mtime_ns = MtimeNs(path);
  LineReader reader(path);
  ReadHeader(reader, path, map.header);
  std::string_view line;
  std::uint64_t begin;
  std::size_t line_no = 1;
  std::vector<std::string_view> fields;
  while (reader.Next(line, begin)) {
    ++line_no;
    const std::size_t count = SplitFieldsPrefix(line, 0, fields);
    if (count != map.header.size()) ThrowRagged(line_no, count, map.header.size(), path);
    map.row_offsets.push_back(begin);
  }
  return map;
}

RawEngine::RawEngine(ColumnCache& cache, RawEngineOptions options)
    : cache_(cache), options_(options) {}

void RawEngine::BindTable(const std::string& table, const std::string& csv_path) {
  FileState st;
  st.path = csv_path;
  if (auto it = files_.find(table); it != files_.end() && it->second.path != csv_path) {
    cache_.EraseFile(it->second.path);
  }
  files_[table] = st;
}

bool RawEngine::HasTable(const std::string& table) const {
  return files_.count(table) > 0;
}

const std::string& RawEngine::FileOf(const std::string& table) const {
  auto it = files_.find(table);
  if (it == files_.end()) {
    throw Error(ErrorKind::kUnknownTable, "table '" + table + "' is not bound to a file");
  }
  return it->second.path;
}

const RawEngine::FileState& RawEngine::CheckFile(const std::string& table) {
  auto it = files_.find(table);
  if (it == files_.end()) {
    throw Error(ErrorKind::kUnknownTable, "table '" + table + "' is not bound to a file");
  }
  FileState& st = it->second;
  const std::uint64_t size = FileSize(st.path);
  const std::int64_t mtime = MtimeNs(st.path);
  if (size != st.size || mtime != st.mtime_ns) {
    cache_.EraseFile(st.path);
    st.size = size;
    st.mtime_ns = mtime;
  }
  return st;
}

void RawEngine::EnsureColumns(const FileState& file,
                              const std::vector<std::string>& attrs,
                              exec::BoundTable& bound, ExecStats& stats,
                              std::uint64_t& working_set) {
  const std::string& path = file.path;
  std::shared_ptr<const PositionalMap> posmap = cache_.Get({path, ""}).posmap;
  std::vector<std::string> missing;
  for (const auto& attr : attrs) {
    CacheEntry e = cache_.Get({path, attr});
    if (e.column) {
      bound.columns[attr] = e.column;
      working_set += e.column->byte_size();
      ++stats.cache_hit_columns;
    } else {
      missing.push_back(attr);
    }
  }
  if (posmap) working_set += posmap->byte_size();
  if (missing.empty()) {
    if (posmap) {
      bound.row_count = posmap->row_count();
      return;
    }
    if (!bound.columns.empty()) {
      bound.row_count = bound.columns.begin()->second->size();
      return;
    }
  }

  LineReader reader(path, options_.read_block_bytes);
  std::vector<std::string> header;
  ReadHeader(reader, path, header);
  std::vector<std::size_t> idx;
  std::size_t needed = 0;
  for (const auto& attr : missing) {
    idx.push_back(HeaderIndex(header, attr, path));
    needed = std::max(needed, idx.back() + 1);
  }
  std::vector<ColumnBuilder> builders(missing.size());
  auto map = posmap ? nullptr : std::make_shared<PositionalMap>();

  const std::uint64_t budget = cache_.budget();
  std::string_view line;
  std::uint64_t begin;
  std::vector<std::string_view> fields;
  std::size_t line_no = 1;
  std::size_t rows = 0;
  auto new_bytes = [&] {
    std::uint64_t b = map ? 8 * map->row_offsets.size() : 0;
    for (const auto& bld : builders) b += bld.bytes();
    return b;
  };
  while (reader.Next(line, begin)) {
    ++line_no;
    const std::size_t count = SplitFieldsPrefix(line, needed, fields);
    if (count != header.size()) ThrowRagged(line_no, count, header.size(), path);
    if (map) map->row_offsets.push_back(begin);
    for (std::size_t i = 0; i < builders.size(); ++i) builders[i].Add(fields[idx[i]]);
    if ((++rows & 4095) == 0 && working_set + new_bytes() > budget) {
      stats.bytes_read_from_disk += reader.consumed();
      ThrowBudget(working_set + new_bytes(), budget, true);
    }
  }
  stats.bytes_read_from_disk += reader.consumed();
  const std::uint64_t added = new_bytes();
  if (working_set + added > budget) ThrowBudget(working_set + added, budget, false);
  working_set += added;

  if (map) {
    map->file = path;
    map->file_size = file.size;
    map->mtime_ns = file.mtime_ns;
    map->header = header;
    posmap = map;
    cache_.Put({path, ""}, CacheEntry{nullptr, posmap});
  }
  for (std::size_t i = 0; i < missing.size(); ++i) {
    auto col = builders[i].Finish();
    cache_.Put({path, missing[i]}, CacheEntry{col, nullptr});
    bound.columns[missing[i]] = std::move(col);
  }
  bound.row_count = posmap->row_count();
}

ResultSet RawEngine::StreamLimited(const QueryAst& ast, const FileState& file,
                                   ExecStats& stats) {
  const std::string& path = file.path;
  const std::string& table = ast.tables.front();
  const std::vector<std::string> attrs = UniqueNames(ast.AttrsOfTable(table));
  const std::uint64_t limit = *ast.limit;

  // Per attribute: a cached column, or a field index parsed per row.
  std::vector<std::shared_ptr<const Column>> cached(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    cached[i] = cache_.Get({path, attrs[i]}).column;
    if (cached[i]) ++stats.cache_hit_columns;
  }
  const bool have_map = cache_.Contains({path, ""});

  LineReader reader(path, options_.read_block_bytes);
  std::vector<std::string> header;
  ReadHeader(reader, path, header);
  std::vector<std::size_t> idx(attrs.size());
  std::size_t needed = 0;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    idx[i] = HeaderIndex(header, attrs[i], path);
    needed = std::max(needed, idx[i] + 1);
  }
  auto slot = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(attrs.begin(), attrs.end(), name) - attrs.begin());
  };
  struct Pred {
    std::size_t slot;
    Comparator op;
    const Value* literal;
  };
  std::vector<Pred> preds;
  for (const auto& p : ast.predicates) preds.push_back({slot(p.attr.name), p.op, &p.literal});
  std::vector<std::size_t> proj;
  for (const auto& p : ast.projections) proj.push_back(slot(p.name));

  // Columns are collected while scanning so a scan that reaches the end of
  // the file leaves them cached; collection stops if they outgrow the budget.
  bool collecting = true;
  std::vector<ColumnBuilder> builders(attrs.size());
  std::vector<std::uint64_t> offsets;
  std::uint64_t collected = 0;

  ResultSet rs;
  for (const auto& p : ast.projections) rs.columns.push_back(p.Qualified());

  std::string_view line;
  std::uint64_t begin;
  std::vector<std::string_view> fields;
  std::vector<Value> vals(attrs.size());
  std::size_t line_no = 1;
  std::uint64_t row = 0;
  bool hit_limit = false;
  while (reader.Next(line, begin)) {
    ++line_no;
    const std::size_t count = SplitFieldsPrefix(line, needed, fields);
    if (count != header.size()) ThrowRagged(line_no, count, header.size(), path);
    if (collecting && !have_map) offsets.push_back(begin);
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      if (cached[i]) {
        vals[i] = cached[i]->at(row);
      } else if (collecting) {
        vals[i] = builders[i].Add(fields[idx[i]]);
      } else {
        vals[i] = ParseField(fields[idx[i]]);
      }
    }
    if (collecting && (row & 4095) == 4095) {
      collected = 8 * offsets.size();
      for (const auto& b : builders) collected += b.bytes();
      if (collected > cache_.budget()) {
        collecting = false;
        builders = std::vector<ColumnBuilder>(attrs.size());
        offsets.clear();
        offsets.shrink_to_fit();
      }
    }
    ++row;
    bool ok = true;
    for (const auto& p : preds) {
      if (!exec::Matches(vals[p.slot], p.op, *p.literal)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      std::vector<Value> out;
      out.reserve(proj.size());
      for (auto s : proj) out.push_back(vals[s]);
      rs.rows.push_back(std::move(out));
      if (rs.rows.size() >= limit) {
        hit_limit = true;
        break;
      }
    }
  }
  stats.rows_scanned += row;
  stats.bytes_read_from_disk += reader.consumed();
  if (hit_limit) {
    stats.early_stop = reader.consumed() < file.size;
    return rs;
  }
  if (collecting) {
    collected = 8 * offsets.size();
    for (const auto& b : builders) collected += b.bytes();
    if (collected <= cache_.budget()) {
      if (!have_map) {
        auto map = std::make_shared<PositionalMap>();
        map->file = path;
        map->file_size = file.size;
        map->mtime_ns = file.mtime_ns;
        map->header = header;
        map->row_offsets = std::move(offsets);
        cache_.Put({path, ""}, CacheEntry{nullptr, std::move(map)});
      }
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        if (!cached[i]) cache_.Put({path, attrs[i]}, CacheEntry{builders[i].Finish(), nullptr});
      }
    }
  }
  return rs;
}

ExecResult RawEngine::Execute(const QueryAst& ast) {
  if (ast.kind != StatementKind::kSelect) {
    throw Error(ErrorKind::kDomain, "the raw engine executes SELECT statements only");
  }
  const auto start = std::chrono::steady_clock::now();
  ExecResult out;
  ExecStats& stats = out.stats;

  std::vector<const FileState*> files;
  for (const auto& t : ast.tables) files.push_back(&CheckFile(t));

  bool done = false;
  if (ast.joins.empty() && ast.limit && !ast.count) {
    const auto attrs = UniqueNames(ast.AttrsOfTable(ast.tables.front()));
    const bool all_cached = std::all_of(attrs.begin(), attrs.end(), [&](const std::string& a) {
      return cache_.Contains({files.front()->path, a});
    });
    if (!all_cached) {
      out.result = StreamLimited(ast, *files.front(), stats);
      done = true;
    }
  }
  if (!done) {
    std::vector<exec::BoundTable> bound(ast.tables.size());
    std::vector<const exec::BoundTable*> ptrs;
    std::uint64_t working_set = 0;
    for (std::size_t t = 0; t < ast.tables.size(); ++t) {
      bound[t].name = ast.tables[t];
      EnsureColumns(*files[t], UniqueNames(ast.AttrsOfTable(ast.tables[t])), bound[t],
                    stats, working_set);
      ptrs.push_back(&bound[t]);
    }
    out.result = exec::Run(ast, ptrs, exec::JoinAlgorithm::kNestedLoop,
                           options_.join_guard, stats);
  }
  stats.peak_cache_bytes = cache_.peak_bytes();
  stats.duration_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  return out;
}

}  // namespace insitu
