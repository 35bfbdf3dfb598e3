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

#include "insitu/db_engine.h"

#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "insitu/csv.h"
#include "insitu/error.h"

namespace fs = std::filesystem;

namespace insitu {

namespace {

constexpr char kMagic[4] = {'I', 'C', 'O', 'L'};
constexpr std::size_t kHeaderBytes = 16;
constexpr unsigned char kTypeNumeric = 1;
constexpr unsigned char kTypeText = 2;

void WriteColumnHeader(std::FILE* f, bool numeric, std::uint64_t count) {
  unsigned char header[kHeaderBytes] = {};
  std::memcpy(header, kMagic, 4);
  header[4] = numeric ? kTypeNumeric : kTypeText;
  std::memcpy(header + 8, &count, 8);
  if (std::fseek(f, 0, SEEK_SET) != 0 || std::fwrite(header, 1, kHeaderBytes, f) != kHeaderBytes) {
    throw Error(ErrorKind::kIo, "cannot write column header");
  }
}

std::FILE* OpenForWrite(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(ErrorKind::kIo, "cannot create " + path);
  return f;
}

void CheckedWrite(std::FILE* f, const void* data, std::size_t n) {
  if (n != 0 && std::fwrite(data, 1, n, f) != n) {
    throw Error(ErrorKind::kIo, "write failed (disk full?)");
  }
}

void CheckedClose(std::FILE*& f) {
  if (f == nullptr) return;
  const bool bad = std::ferror(f) != 0;
  const int rc = std::fclose(f);
  f = nullptr;
  if (bad || rc != 0) throw Error(ErrorKind::kIo, "write failed (disk full?)");
}

std::string ColumnPath(const std::string& dir, const std::string& attr) {
  return dir + "/" + attr + ".col";
}

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

}  // namespace

const ColumnMeta* TableStore::Find(const std::string& attr) const {
  for (const auto& c : schema) {
    if (c.name == attr) return &c;
  }
  return nullptr;
}

void WriteMeta(const TableStore& store) {
  const std::string path = store.dir + "/meta";
  std::ofstream out(path, std::ios::trunc);
  out << "table " << store.name << "\n";
  out << "rows " << store.row_count << "\n";
  for (const auto& c : store.schema) {
    out << "column " << c.name << " " << (c.numeric ? "numeric" : "text");
    if (c.has_range) {
      out << " " << FormatNumber(c.min) << " " << FormatNumber(c.max);
    } else {
      out << " - -";
    }
    out << "\n";
  }
  out.close();
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
}

TableStore ReadMeta(const std::string& dir) {
  std::ifstream in(dir + "/meta");
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + dir + "/meta");
  TableStore store;
  store.dir = dir;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "table") {
      ss >> store.name;
    } else if (key == "rows") {
      ss >> store.row_count;
    } else if (key == "column") {
      ColumnMeta c;
      std::string type, lo, hi;
      ss >> c.name >> type >> lo >> hi;
      c.numeric = type == "numeric";
      if (lo != "-" && ParseNumber(lo, c.min) && ParseNumber(hi, c.max)) c.has_range = true;
      store.schema.push_back(std::move(c));
    } else if (!key.empty()) {
      throw FormatError(line_no, dir + "/meta: unknown key '" + key + "'");
    }
  }
  return store;
}

TableWriter::TableWriter(DbEngine& engine, const std::string& table,
                         std::vector<std::string> columns, JournalMode journal)
    : engine_(engine), table_(table), start_(std::chrono::steady_clock::now()) {
  if (auto it = engine_.tables_.find(table); it != engine_.tables_.end()) {
    if (it->second.row_count > 0) {
      throw Error(ErrorKind::kAlreadyLoaded,
                  "table '" + table + "' is already loaded; truncate it first");
    }
    engine_.tables_.erase(it);
  }
  dir_ = engine_.data_dir_ + "/" + table;
  engine_.cache_.EraseFile(dir_);
  std::error_code ec;
  fs::remove_all(dir_, ec);
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir_ + ": " + ec.message());
  try {
    for (auto& name : columns) {
      ColumnFile cf;
      cf.meta.name = name;
      cf.file = OpenForWrite(ColumnPath(dir_, name));
      columns_.push_back(cf);
      WriteColumnHeader(cf.file, true, 0);
    }
    if (journal == JournalMode::kOn) journal_ = OpenForWrite(dir_ + "/journal.log");
  } catch (...) {
    Abort();
    throw;
  }
}

TableWriter::~TableWriter() {
  if (!done_) Abort();
}

void TableWriter::AddRow(const std::vector<std::string_view>& fields,
                         std::string_view record) {
  if (journal_ != nullptr) {
    if (record.empty()) {
      record_buf_.clear();
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) record_buf_.push_back(',');
        record_buf_.append(fields[i]);
      }
      record = record_buf_;
    }
    CheckedWrite(journal_, record.data(), record.size());
    CheckedWrite(journal_, "\n", 1);
  }
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    ColumnFile& cf = columns_[i];
    const std::string_view f = fields[i];
    double v;
    const bool is_num = ParseNumber(f, v);
    if (!cf.typed) {
      cf.typed = true;
      cf.meta.numeric = is_num;
    }
    if (cf.meta.numeric) {
      if (!is_num) {
        throw Error(ErrorKind::kFormat,
                    "type conflict in column '" + cf.meta.name + "' at data row " +
                        std::to_string(rows_ + 1) + ": '" + std::string(f) +
                        "' is not numeric");
      }
      CheckedWrite(cf.file, &v, 8);
      if (!cf.meta.has_range) {
        cf.meta.min = cf.meta.max = v;
        cf.meta.has_range = true;
      } else {
        cf.meta.min = std::min(cf.meta.min, v);
        cf.meta.max = std::max(cf.meta.max, v);
      }
    } else {
      const auto len = static_cast<std::uint32_t>(f.size());
      CheckedWrite(cf.file, &len, 4);
      CheckedWrite(cf.file, f.data(), f.size());
    }
  }
  ++rows_;
}

LoadStats TableWriter::Commit(std::uint64_t input_bytes) {
  LoadStats stats;
  stats.rows_loaded = rows_;
  stats.input_bytes = input_bytes;
  TableStore store;
  store.name = table_;
  store.dir = dir_;
  store.row_count = rows_;
  for (auto& cf : columns_) {
    WriteColumnHeader(cf.file, cf.meta.numeric, rows_);
    CheckedClose(cf.file);
    stats.binary_bytes += FileSize(ColumnPath(dir_, cf.meta.name));
    store.schema.push_back(cf.meta);
  }
  if (journal_ != nullptr) {
    if (std::fflush(journal_) != 0) throw Error(ErrorKind::kIo, "journal flush failed");
    if (engine_.options_.fsync_journal) ::fsync(fileno(journal_));
    CheckedClose(journal_);
    stats.journal_bytes = FileSize(dir_ + "/journal.log");
  }
  WriteMeta(store);
  engine_.Register(std::move(store));
  done_ = true;
  stats.duration_ms = ElapsedMs(start_);
  return stats;
}

void TableWriter::Abort() {
  for (auto& cf : columns_) {
    if (cf.file != nullptr) std::fclose(cf.file);
    cf.file = nullptr;
  }
  if (journal_ != nullptr) std::fclose(journal_);
  journal_ = nullptr;
  std::error_code ec;
  fs::remove_all(dir_, ec);
  done_ = true;
}

DbEngine::DbEngine(std::string data_dir, ColumnCache& cache, DbEngineOptions options)
    : data_dir_(std::move(data_dir)), cache_(cache), options_(options) {
  std::error_code ec;
  fs::create_directories(data_dir_, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create data dir " + data_dir_ + ": " + ec.message());
  Discover();
}

void DbEngine::Discover() {
  for (const auto& entry : fs::directory_iterator(data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta")) {
      TableStore store = ReadMeta(entry.path().string());
      store.dir = data_dir_ + "/" + store.name;
      tables_[store.name] = std::move(store);
    }
  }
}

void DbEngine::Register(TableStore store) {
  cache_.EraseFile(store.dir);
  tables_[store.name] = std::move(store);
}

bool DbEngine::HasTable(const std::string& table) const {
  return tables_.count(table) > 0;
}

const TableStore& DbEngine::Store(const std::string& table) const {
  auto it = tables_.find(table);
  if (it == tables_.end()) {
    throw Error(ErrorKind::kNotLoaded, "table '" + table + "' is not loaded");
  }
  return it->second;
}

LoadStats DbEngine::LoadTable(const std::string& csv, const std::string& table,
                              JournalMode journal,
                              const std::vector<std::string>* attrs) {
  const auto start = std::chrono::steady_clock::now();
  LineReader reader(csv);
  std::string_view line;
  std::uint64_t begin;
  if (!reader.Next(line, begin)) throw FormatError(1, csv + ": missing header row");
  const std::vector<std::string> header = ParseHeader(line);
  std::vector<std::string> names = attrs ? *attrs : header;
  std::vector<std::size_t> idx;
  for (const auto& n : names) {
    auto it = std::find(header.begin(), header.end(), n);
    if (it == header.end()) {
      throw Error(ErrorKind::kSchema, "attribute '" + n + "' not in header of " + csv);
    }
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  const bool full = attrs == nullptr;
  TableWriter writer(*this, table, names, journal);
  std::vector<std::string_view> fields;
  std::vector<std::string_view> picked(idx.size());
  std::size_t line_no = 1;
  while (reader.Next(line, begin)) {
    ++line_no;
    SplitFields(line, fields);
    if (fields.size() != header.size()) {
      throw FormatError(line_no, csv + ": row has " + std::to_string(fields.size()) +
                                     " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t i = 0; i < idx.size(); ++i) picked[i] = fields[idx[i]];
    writer.AddRow(picked, full ? line : std::string_view());
  }
  LoadStats stats = writer.Commit(FileSize(csv));
  stats.duration_ms = ElapsedMs(start);
  return stats;
}

double DbEngine::TruncateTable(const std::string& table) {
  const auto start = std::chrono::steady_clock::now();
  auto it = tables_.find(table);
  if (it == tables_.end()) {
    throw Error(ErrorKind::kUnknownTable, "cannot truncate unknown table '" + table + "'");
  }
  TableStore& store = it->second;
  for (auto& c : store.schema) {
    std::FILE* f = OpenForWrite(ColumnPath(store.dir, c.name));
    WriteColumnHeader(f, c.numeric, 0);
    CheckedClose(f);
    c.has_range = false;
    c.min = c.max = 0;
  }
  std::error_code ec;
  fs::remove(store.dir + "/journal.log", ec);
  store.row_count = 0;
  WriteMeta(store);
  cache_.EraseFile(store.dir);
  return ElapsedMs(start);
}

std::shared_ptr<const Column> DbEngine::ReadColumn(const TableStore& store,
                                                   const ColumnMeta& meta,
                                                   ExecStats& stats) {
  const std::string path = ColumnPath(store.dir, meta.name);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  stats.bytes_read_from_disk += buf.size();
  if (buf.size() < kHeaderBytes || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw FormatError(0, path + ": bad column header");
  }
  std::uint64_t count;
  std::memcpy(&count, buf.data() + 8, 8);
  if (count != store.row_count) {
    throw FormatError(0, path + ": holds " + std::to_string(count) + " rows, catalog says " +
                             std::to_string(store.row_count));
  }
  const unsigned char type = static_cast<unsigned char>(buf[4]);
  const char* p = buf.data() + kHeaderBytes;
  const char* end = buf.data() + buf.size();
  if (type == kTypeNumeric) {
    if (static_cast<std::uint64_t>(end - p) != 8 * count) {
      throw FormatError(0, path + ": truncated numeric column");
    }
    std::vector<double> nums(count);
    std::memcpy(nums.data(), p, 8 * count);
    return std::make_shared<const Column>(std::move(nums));
  }
  std::vector<std::string> text;
  text.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t len;
    if (end - p < 4) throw FormatError(0, path + ": truncated text column");
    std::memcpy(&len, p, 4);
    p += 4;
    if (static_cast<std::uint64_t>(end - p) < len) {
      throw FormatError(0, path + ": truncated text column");
    }
    text.emplace_back(p, len);
    p += len;
  }
  return std::make_shared<const Column>(std::move(text));
}

namespace {

// True when no value in [min, max] can satisfy `op literal`.
bool Disjoint(const ColumnMeta& meta, Comparator op, double lit) {
  switch (op) {
    case Comparator::kLt: return meta.min >= lit;
    case Comparator::kLe: return meta.min > lit;
    case Comparator::kGt: return meta.max <= lit;
    case Comparator::kGe: return meta.max < lit;
    case Comparator::kEq: return lit < meta.min || lit > meta.max;
  }
  return false;
}

}  // namespace

ExecResult DbEngine::Execute(const QueryAst& ast) {
  if (ast.kind != StatementKind::kSelect) {
    throw Error(ErrorKind::kDomain, "Execute handles SELECT statements only");
  }
  const auto start = std::chrono::steady_clock::now();
  ExecResult out;
  ExecStats& stats = out.stats;

  std::vector<const TableStore*> stores;
  for (const auto& t : ast.tables) stores.push_back(&Store(t));
  for (std::size_t t = 0; t < stores.size(); ++t) {
    for (const auto& a : ast.AttrsOfTable(ast.tables[t])) {
      if (stores[t]->Find(a.name) == nullptr) {
        throw Error(ErrorKind::kSchema, "table '" + ast.tables[t] + "' has no attribute '" +
                                            a.name + "'");
      }
    }
  }

  std::vector<bool> empty(stores.size(), false);
  for (std::size_t t = 0; t < stores.size(); ++t) {
    if (stores[t]->row_count == 0) empty[t] = true;
    for (const auto& p : ast.PredicatesOfTable(ast.tables[t])) {
      const ColumnMeta* meta = stores[t]->Find(p.attr.name);
      if (meta->numeric && meta->has_range && p.literal.index() == 0 &&
          Disjoint(*meta, p.op, std::get<0>(p.literal))) {
        empty[t] = true;
      }
    }
  }

  std::vector<exec::BoundTable> bound(stores.size());
  std::vector<const exec::BoundTable*> ptrs;
  const bool pruned = std::find(empty.begin(), empty.end(), true) != empty.end();
  std::uint64_t working_set = 0;
  for (std::size_t t = 0; t < stores.size(); ++t) {
    bound[t].name = ast.tables[t];
    bound[t].row_count = stores[t]->row_count;
    ptrs.push_back(&bound[t]);
    if (pruned) continue;
    for (const auto& a : ast.AttrsOfTable(ast.tables[t])) {
      if (bound[t].columns.count(a.name)) continue;
      CacheEntry e = cache_.Get({stores[t]->dir, a.name});
      std::shared_ptr<const Column> col = e.column;
      if (col) {
        ++stats.cache_hit_columns;
      } else {
        col = ReadColumn(*stores[t], *stores[t]->Find(a.name), stats);
      }
      working_set += col->byte_size();
      if (working_set > cache_.budget()) {
        throw Error(ErrorKind::kBudgetExceeded,
                    "query working set requires at least " + std::to_string(working_set) +
                        " bytes, cache budget is " + std::to_string(cache_.budget()) +
                        " bytes");
      }
      if (!e.column) cache_.Put({stores[t]->dir, a.name}, CacheEntry{col, nullptr});
      bound[t].columns[a.name] = std::move(col);
    }
  }
  out.result = exec::Run(ast, ptrs, exec::JoinAlgorithm::kHash, 0, stats, empty);
  stats.peak_cache_bytes = cache_.peak_bytes();
  stats.duration_ms = ElapsedMs(start);
  return out;
}

}  // namespace insitu
