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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "insitu/analyzer.h"
#include "insitu/db_engine.h"
#include "insitu/query_model.h"

namespace insitu {

enum class Technique { kQca, kRua };
enum class EngineChoice { kRaw, kDb };

const char* TechniqueName(Technique t);
const char* EngineChoiceName(EngineChoice e);

struct PartitionMetrics {
  double db_pct = 0;        // |db| / |schema|
  double raw_only_pct = 0;  // |raw \ db| / |schema|
  double repl_pct = 0;      // |raw ∩ db| / |schema|
};

struct RuaThresholds {
  double read_bytes = 2e6;  // strictly below
  double mem_pct = 0.1;     // peak, strictly below

  void Validate() const;  // throws Error(kConfig)
};

// Attribute names are table-qualified ("t.a"), as produced by Classify.
struct PartitionPlan {
  Technique technique = Technique::kQca;
  std::vector<std::string> schema;
  std::set<std::string> raw_attrs;
  std::set<std::string> db_attrs;
  std::set<std::string> replicated_attrs;
  PartitionMetrics metrics;
  std::map<std::string, EngineChoice> routing;
  RuaThresholds thresholds;

  // Attribute names of `table` on one side, unqualified, in schema order.
  std::vector<std::string> RawColumnsOf(const std::string& table) const;
  std::vector<std::string> DbColumnsOf(const std::string& table) const;
};

PartitionMetrics ComputeMetrics(const std::set<std::string>& raw,
                                const std::set<std::string>& db, std::size_t schema_size);

// Simple and sampling queries go raw, complex ones to the db side.
PartitionPlan QcaPartition(const std::map<std::string, QueryClass>& classes,
                           const std::vector<std::string>& schema);

// Sampling queries whose measured footprint stays under `thresholds` go raw,
// everything else to the db side. A missing or empty profile counts as under.
PartitionPlan RuaPartition(const std::map<std::string, QueryClass>& classes,
                           const std::map<std::string, std::optional<ResourceProfile>>& profiles,
                           const std::vector<std::string>& schema,
                           RuaThresholds thresholds = {});

struct CapacityCheck {
  bool fits = false;
  double required_bytes = 0;
  double limit_bytes = 0;
};
CapacityCheck RawCapacityCheck(double dataset_bytes, const SystemSpec& spec,
                               double headroom = 0.9);

// Planned queries use the routing table. Others prefer the side the
// technique's rule picks and fall back to the other side when only it covers
// the attributes. Throws Error(kUncoveredQuery) when neither does.
EngineChoice RouteQuery(const std::string& query_id, const QueryClass& cls,
                        const PartitionPlan& plan);

struct MaterializeResult {
  std::string slice_path;  // empty when the plan keeps nothing raw
  std::uint64_t slice_bytes = 0;
  std::uint64_t input_bytes = 0;
  bool loaded = false;     // db columns were loaded
  LoadStats load;
  double duration_ms = 0;
};

// One pass over `source_csv` writing the raw columns of `table` to
// `slice_path` and loading its db columns into `db`.
MaterializeResult MaterializePlan(const PartitionPlan& plan, const std::string& table,
                                  const std::string& source_csv, const std::string& slice_path,
                                  DbEngine& db, JournalMode journal);

nlohmann::json PlanToJson(const PartitionPlan& plan);
PartitionPlan PlanFromJson(const nlohmann::json& j);  // throws Error(kConfig)
void WritePlanFile(const PartitionPlan& plan, const std::string& path);
PartitionPlan ReadPlanFile(const std::string& path);

}  // namespace insitu
