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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "insitu/exec.h"
#include "insitu/monitor.h"
#include "insitu/query_model.h"
#include <json.hpp>

namespace insitu {

struct SystemSpec {
  int cores = 4;
  double ram_bytes = 16e9;
  double max_read_Bps = 300e6;
  double max_write_Bps = 200e6;
  double ram_expansion_factor = 2.24;

  void Validate() const;  // throws Error(kConfig)
  // Cores and MemTotal of this machine; bandwidth ceilings keep defaults.
  static SystemSpec Detect();
};

struct ResourceProfile {
  std::string task_id;
  std::uint64_t samples = 0;  // ticks observed
  double duration_ms = 0;     // ticks x period
  double mean_cpu_pct = 0, peak_cpu_pct = 0;
  double mean_mem_pct = 0, peak_mem_pct = 0;
  std::uint64_t peak_rss_bytes = 0;
  double read_bytes = 0, write_bytes = 0;
  double mean_io_wait_pct = 0;

  bool operator==(const ResourceProfile&) const = default;
};

enum class ProfileScope {
  kSystem,   // TOTAL rows
  kProcess,  // PROC rows summed per tick; io_wait still from TOTAL
};

// Mergeable time-weighted sums for one task.
class ProfileAccumulator {
 public:
  struct Tick {
    std::optional<double> cpu, mem, read_Bps, write_Bps, io_wait;
    std::optional<std::uint64_t> rss;
  };

  void Add(const Tick& t, double weight_ms);
  void Merge(const ProfileAccumulator& other);
  bool empty() const { return ticks_ == 0; }
  ResourceProfile Finish(const std::string& task_id) const;

 private:
  std::uint64_t ticks_ = 0;
  double weight_ms_ = 0;
  double cpu_sum_ = 0, cpu_w_ = 0, cpu_peak_ = 0;
  double mem_sum_ = 0, mem_w_ = 0, mem_peak_ = 0;
  double wait_sum_ = 0, wait_w_ = 0;
  std::uint64_t rss_peak_ = 0;
  double read_bytes_ = 0, write_bytes_ = 0;
};

// Task id -> profile; nullopt marks a task no sample landed in. Gap rows and
// samples tagged with ids outside `tasks` are ignored. Rates above `cap`'s
// ceilings are clipped before integration when `cap` is given.
std::map<std::string, std::optional<ResourceProfile>> AggregateProfiles(
    const std::vector<Sample>& samples, const std::vector<WorkloadTask>& tasks,
    double period_ms, ProfileScope scope, const SystemSpec* cap = nullptr);

// Per-task accumulators, exposed so partial sample lists can be merged.
std::map<std::string, ProfileAccumulator> AccumulateProfiles(
    const std::vector<Sample>& samples, double period_ms, ProfileScope scope,
    const SystemSpec* cap = nullptr);

struct TaskTiming {
  std::string task_id;
  bool is_load = false;
  double duration_ms = 0;
};

struct Wet {
  double total_ms = 0;
  double load_ms = 0;
  double query_ms = 0;
};
Wet ComputeWet(const std::vector<TaskTiming>& timings);

struct IoAmplification {
  double read_x = 0;
  double write_x = 0;
};
// Throws Error(kDomain) unless raw_file_bytes > 0.
IoAmplification ComputeIoAmplification(double total_read_bytes, double total_write_bytes,
                                       double raw_file_bytes);

enum class IoDirection { kRead, kWrite };
struct Bandwidth {
  double pct = 0;
  bool saturated = false;
};
Bandwidth BandwidthUtilization(double rate_Bps, const SystemSpec& spec, IoDirection dir);

double CachedDatasetBytes(double file_bytes, const SystemSpec& spec);
double EffectiveRamPct(double process_rss_bytes, double cached_dataset_bytes,
                       const SystemSpec& spec);

struct ColdHotDelta {
  double time_delta_ms = 0;
  std::int64_t bytes_delta = 0;
};
ColdHotDelta ComputeColdHotDelta(const ExecStats& cold, const ExecStats& hot);

// ---- run report --------------------------------------------------------------

struct TaskRecord {
  std::string task_id;
  std::string statement;
  bool is_load = false;
  bool ok = true;
  std::string error;
  double duration_ms = 0;
  std::uint64_t result_rows = 0;
  std::string engine;  // "raw" or "db" for routed plans
  ExecStats stats;
};

struct RunSummary {
  std::string engine;
  std::vector<WorkloadTask> tasks;
  std::vector<TaskRecord> records;
  std::vector<Sample> samples;
  double period_ms = 1000;
  SystemSpec spec;
  double raw_file_bytes = 0;  // bytes of every input file the run touched
  FlushReport flush;
  std::uint64_t peak_cache_bytes = 0;
};

nlohmann::json BuildReport(const RunSummary& run, std::size_t max_series_points = 512);

// `ts_ms,series,value`, one row per sample field, full resolution.
void WriteSeriesCsv(const std::string& path, const std::vector<Sample>& samples);

}  // namespace insitu
