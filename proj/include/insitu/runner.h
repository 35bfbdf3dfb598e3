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

#include <json.hpp>

#include "insitu/analyzer.h"
#include "insitu/db_engine.h"
#include "insitu/error.h"
#include "insitu/monitor.h"

namespace insitu {

struct RunConfig {
  std::string workload_path;
  std::string engine = "raw";  // raw | db | plan:<file>
  std::string data_dir;        // db tables; empty means <out_dir>/db
  // Tables bound before the first task, table -> CSV path.
  std::map<std::string, std::string> tables;
  MonitorConfig monitor;  // output_path is set to <out_dir>/samples.csv
  std::string source = "procfs";  // procfs | synthetic | replay:<file>
  // Synthetic and replay sources run on a virtual clock: each task is given
  // this many sampling ticks before it executes.
  std::uint64_t virtual_ticks_per_task = 2;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::uint64_t cache_budget = 8ULL << 30;
  std::uint64_t join_guard = 1'000'000'000ULL;
  JournalMode journal = JournalMode::kOn;
  bool parallel_load = false;
  bool write_results = false;  // <out_dir>/results/<task>.csv
  SystemSpec spec;

  void Validate() const;  // throws Error(kConfig)
};

struct RunReport {
  std::vector<TaskRecord> records;
  Wet wet;
  FlushReport flush;
  bool aborted = false;
  std::optional<ErrorKind> error_kind;
  std::string error;
  nlohmann::json report;
};

// Executes the workload in file order under the monitor. Configuration and
// workload parse errors throw before any task runs. An engine error stops
// the workload; the monitor is still drained, reports are written, and the
// error is returned in the report.
RunReport Run(const RunConfig& config);

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitOther = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitParse = 3;
inline constexpr int kExitEngine = 4;
inline constexpr int kExitMonitor = 5;

int ExitCodeFor(ErrorKind kind);

}  // namespace insitu
