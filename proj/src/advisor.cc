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

#include "insitu/advisor.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "insitu/csv.h"
#include "insitu/error.h"

namespace insitu {
namespace {

using nlohmann::json;

bool Covers(const std::set<std::string>& side, const std::set<std::string>& attrs) {
  return std::includes(side.begin(), side.end(), attrs.begin(), attrs.end());
}

void CheckSchema(const std::map<std::string, QueryClass>& classes,
                 const std::vector<std::string>& schema) {
  if (classes.empty()) throw Error(ErrorKind::kConfig, "no queries to partition");
  const std::set<std::string> known(schema.begin(), schema.end());
  if (known.size() != schema.size()) throw Error(ErrorKind::kSchema, "duplicate schema attribute");
  for (const auto& [id, cls] : classes) {
    for (const auto& a : cls.attrs) {
      if (!known.count(a)) {
        throw Error(ErrorKind::kSchema, "query " + id + " references '" + a +
                                            "' which is not in the schema");
      }
    }
  }
}

void Finish(PartitionPlan& plan) {
  plan.replicated_attrs.clear();
  std::set_intersection(plan.raw_attrs.begin(), plan.raw_attrs.end(), plan.db_attrs.begin(),
                        plan.db_attrs.end(),
                        std::inserter(plan.replicated_attrs, plan.replicated_attrs.end()));
  plan.metrics = ComputeMetrics(plan.raw_attrs, plan.db_attrs, plan.schema.size());
}

std::vector<std::string> ColumnsOf(const std::vector<std::string>& schema,
                                   const std::set<std::string>& side, const std::string& table) {
  std::vector<std::string> out;
  const std::string prefix = table + ".";
  for (const auto& a : schema) {
    if (a.rfind(prefix, 0) == 0 && side.count(a)) out.push_back(a.substr(prefix.size()));
  }
  return out;
}

bool Qualifies(const std::optional<ResourceProfile>& p, const RuaThresholds& t) {
  if (!p) return true;
  return p->read_bytes < t.read_bytes && p->peak_mem_pct < t.mem_pct;
}

}  // namespace

const char* TechniqueName(Technique t) { return t == Technique::kQca ? "QCA" : "RUA"; }
const char* EngineChoiceName(EngineChoice e) { return e == EngineChoice::kRaw ? "raw" : "db"; }

void RuaThresholds::Validate() const {
  if (!(read_bytes > 0) || !(mem_pct > 0)) {
    throw Error(ErrorKind::kConfig, "RUA thresholds must be positive");
  }
}

std::vector<std::string> PartitionPlan::RawColumnsOf(const std::string& table) const {
  return ColumnsOf(schema, raw_attrs, table);
}

std::vector<std::string> PartitionPlan::DbColumnsOf(const std::string& table) const {
  return ColumnsOf(schema, db_attrs, table);
}

PartitionMetrics ComputeMetrics(const std::set<std::string>& raw,
                                const std::set<std::string>& db, std::size_t schema_size) {
  PartitionMetrics m;
  if (schema_size == 0) return m;
  std::size_t repl = 0;
  for (const auto& a : raw) repl += db.count(a);
  const double n = static_cast<double>(schema_size);
  m.db_pct = static_cast<double>(db.size()) / n * 100.0;
  m.raw_only_pct = static_cast<double>(raw.size() - repl) / n * 100.0;
  m.repl_pct = static_cast<double>(repl) / n * 100.0;
  return m;
}

PartitionPlan QcaPartition(const std::map<std::string, QueryClass>& classes,
                           const std::vector<std::string>& schema) {
  CheckSchema(classes, schema);
  PartitionPlan plan;
  plan.technique = Technique::kQca;
  plan.schema = schema;
  for (const auto& [id, cls] : classes) {
    if (cls.kind == QueryKind::kComplex) {
      plan.db_attrs.insert(cls.attrs.begin(), cls.attrs.end());
      plan.routing[id] = EngineChoice::kDb;
    } else {
      plan.raw_attrs.insert(cls.attrs.begin(), cls.attrs.end());
      plan.routing[id] = EngineChoice::kRaw;
    }
  }
  Finish(plan);
  return plan;
}

PartitionPlan RuaPartition(const std::map<std::string, QueryClass>& classes,
                           const std::map<std::string, std::optional<ResourceProfile>>& profiles,
                           const std::vector<std::string>& schema, RuaThresholds thresholds) {
  thresholds.Validate();
  CheckSchema(classes, schema);
  PartitionPlan plan;
  plan.technique = Technique::kRua;
  plan.schema = schema;
  plan.thresholds = thresholds;
  for (const auto& [id, cls] : classes) {
    std::optional<ResourceProfile> profile;
    if (auto it = profiles.find(id); it != profiles.end()) profile = it->second;
    if (cls.kind == QueryKind::kSampling && Qualifies(profile, thresholds)) {
      plan.raw_attrs.insert(cls.attrs.begin(), cls.attrs.end());
      plan.routing[id] = EngineChoice::kRaw;
    } else {
      plan.db_attrs.insert(cls.attrs.begin(), cls.attrs.end());
      plan.routing[id] = EngineChoice::kDb;
    }
  }
  Finish(plan);
  return plan;
}

CapacityCheck RawCapacityCheck(double dataset_bytes, const SystemSpec& spec, double headroom) {
  if (!(dataset_bytes > 0)) throw Error(ErrorKind::kDomain, "dataset size must be positive");
  CapacityCheck c;
  c.required_bytes = dataset_bytes * spec.ram_expansion_factor;
  c.limit_bytes = spec.ram_bytes * headroom;
  c.fits = c.required_bytes <= c.limit_bytes;
  return c;
}

EngineChoice RouteQuery(const std::string& query_id, const QueryClass& cls,
                        const PartitionPlan& plan) {
  if (auto it = plan.routing.find(query_id); it != plan.routing.end()) return it->second;
  EngineChoice preferred;
  if (plan.technique == Technique::kQca) {
    preferred = cls.kind == QueryKind::kComplex ? EngineChoice::kDb : EngineChoice::kRaw;
  } else {
    preferred = cls.kind == QueryKind::kSampling ? EngineChoice::kRaw : EngineChoice::kDb;
  }
  const EngineChoice other = preferred == EngineChoice::kRaw ? EngineChoice::kDb
                                                             : EngineChoice::kRaw;
  auto side = [&](EngineChoice e) -> const std::set<std::string>& {
    return e == EngineChoice::kRaw ? plan.raw_attrs : plan.db_attrs;
  };
  if (Covers(side(preferred), cls.attrs)) return preferred;
  if (Covers(side(other), cls.attrs)) return other;
  throw Error(ErrorKind::kUncoveredQuery,
              "query " + query_id + " uses attributes outside both partitions");
}

MaterializeResult MaterializePlan(const PartitionPlan& plan, const std::string& table,
                                  const std::string& source_csv, const std::string& slice_path,
                                  DbEngine& db, JournalMode journal) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> raw_cols = plan.RawColumnsOf(table);
  const std::vector<std::string> db_cols = plan.DbColumnsOf(table);
  MaterializeResult result;
  result.input_bytes = FileSize(source_csv);

  LineReader reader(source_csv);
  std::string_view line;
  std::uint64_t begin;
  if (!reader.Next(line, begin)) throw FormatError(1, source_csv + ": missing header row");
  const std::vector<std::string> header = ParseHeader(line);
  auto index_of = [&](const std::vector<std::string>& cols) {
    std::vector<std::size_t> idx;
    for (const auto& c : cols) {
      auto it = std::find(header.begin(), header.end(), c);
      if (it == header.end()) {
        throw Error(ErrorKind::kSchema,
                    "plan attribute '" + table + "." + c + "' not in header of " + source_csv);
      }
      idx.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    return idx;
  };
  const auto raw_idx = index_of(raw_cols);
  const auto db_idx = index_of(db_cols);
  std::size_t needed = 0;
  for (const auto* idx : {&raw_idx, &db_idx}) {
    for (std::size_t i : *idx) needed = std::max(needed, i + 1);
  }

  std::FILE* slice = nullptr;
  std::string out;
  auto flush = [&] {
    if (out.empty()) return;
    if (std::fwrite(out.data(), 1, out.size(), slice) != out.size()) {
      throw Error(ErrorKind::kIo, "cannot write " + slice_path);
    }
    result.slice_bytes += out.size();
    out.clear();
  };
  if (!raw_cols.empty()) {
    slice = std::fopen(slice_path.c_str(), "wb");
    if (slice == nullptr) throw Error(ErrorKind::kIo, "cannot create " + slice_path);
    for (std::size_t i = 0; i < raw_cols.size(); ++i) {
      if (i) out += ',';
      out += raw_cols[i];
    }
    out += '\n';
  }
  std::unique_ptr<TableWriter> writer;
  if (!db_cols.empty()) writer = std::make_unique<TableWriter>(db, table, db_cols, journal);

  try {
    std::vector<std::string_view> fields;
    std::vector<std::string_view> picked(db_idx.size());
    std::string record;
    std::size_t line_no = 1;
    while (reader.Next(line, begin)) {
      ++line_no;
      const std::size_t count = SplitFieldsPrefix(line, needed, fields);
      if (count != header.size()) {
        throw FormatError(line_no, source_csv + ": row has " + std::to_string(count) +
                                       " fields, expected " + std::to_string(header.size()));
      }
      if (slice != nullptr) {
        for (std::size_t i = 0; i < raw_idx.size(); ++i) {
          if (i) out += ',';
          out += fields[raw_idx[i]];
        }
        out += '\n';
        if (out.size() >= (1u << 20)) flush();
      }
      if (writer) {
        record.clear();
        for (std::size_t i = 0; i < db_idx.size(); ++i) {
          picked[i] = fields[db_idx[i]];
          if (i) record += ',';
          record += picked[i];
        }
        writer->AddRow(picked, record);
      }
    }
    if (slice != nullptr) {
      flush();
      if (std::fclose(slice) != 0) {
        slice = nullptr;
        throw Error(ErrorKind::kIo, "cannot close " + slice_path);
      }
      slice = nullptr;
      result.slice_path = slice_path;
    }
    if (writer) {
      result.load = writer->Commit(result.input_bytes);
      result.loaded = true;
    }
  } catch (...) {
    if (slice != nullptr) std::fclose(slice);
    std::error_code ec;
    std::filesystem::remove(slice_path, ec);
    throw;
  }
  result.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  result.load.duration_ms = result.duration_ms;
  return result;
}

json PlanToJson(const PartitionPlan& plan) {
  json routing = json::object();
  for (const auto& [id, e] : plan.routing) routing[id] = EngineChoiceName(e);
  json j{{"technique", TechniqueName(plan.technique)},
         {"schema", plan.schema},
         {"raw_attrs", plan.raw_attrs},
         {"db_attrs", plan.db_attrs},
         {"replicated_attrs", plan.replicated_attrs},
         {"metrics",
          {{"db_pct", plan.metrics.db_pct},
           {"raw_only_pct", plan.metrics.raw_only_pct},
           {"repl_pct", plan.metrics.repl_pct}}},
         {"routing", routing}};
  if (plan.technique == Technique::kRua) {
    j["thresholds"] = {{"read_bytes", plan.thresholds.read_bytes},
                       {"mem_pct", plan.thresholds.mem_pct}};
  }
  return j;
}

PartitionPlan PlanFromJson(const json& j) {
  try {
    PartitionPlan plan;
    const std::string tech = j.at("technique").get<std::string>();
    if (tech == "QCA") plan.technique = Technique::kQca;
    else if (tech == "RUA") plan.technique = Technique::kRua;
    else throw Error(ErrorKind::kConfig, "unknown technique '" + tech + "'");
    plan.schema = j.at("schema").get<std::vector<std::string>>();
    plan.raw_attrs = j.at("raw_attrs").get<std::set<std::string>>();
    plan.db_attrs = j.at("db_attrs").get<std::set<std::string>>();
    for (const auto& [id, e] : j.at("routing").items()) {
      const std::string v = e.get<std::string>();
      if (v != "raw" && v != "db") throw Error(ErrorKind::kConfig, "bad routing '" + v + "'");
      plan.routing[id] = v == "raw" ? EngineChoice::kRaw : EngineChoice::kDb;
    }
    if (j.contains("thresholds")) {
      plan.thresholds.read_bytes = j["thresholds"].at("read_bytes").get<double>();
      plan.thresholds.mem_pct = j["thresholds"].at("mem_pct").get<double>();
    }
    // Derived fields are recomputed rather than trusted.
    Finish(plan);
    return plan;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, std::string("malformed plan: ") + e.what());
  }
}

void WritePlanFile(const PartitionPlan& plan, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << PlanToJson(plan).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
}

PartitionPlan ReadPlanFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kConfig, "cannot read plan " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kConfig, "plan " + path + " is not JSON: " + e.what());
  }
  return PlanFromJson(j);
}

}  // namespace insitu
