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

#include <condition_variable>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "insitu/stat_sources.h"

namespace insitu {

// Shared "which task is running" slot. One writer, many readers; the whole
// string is swapped under a lock.
class TaskRegister {
 public:
  static constexpr const char* kIdle = "IDLE";

  void Set(std::string task_id);
  std::string Get() const;
  std::uint64_t generation() const;

 private:
  mutable std::mutex mu_;
  std::string current_ = kIdle;
  std::uint64_t generation_ = 0;
};

enum class Scope { kTotal, kProcess };

struct Sample {
  std::int64_t ts_ms = 0;
  std::string task_id;
  Scope scope = Scope::kTotal;
  std::string process;  // empty for kTotal
  std::optional<double> cpu_pct;
  std::optional<double> mem_pct;
  std::optional<std::uint64_t> rss_bytes;
  std::optional<double> read_Bps;
  std::optional<double> write_Bps;
  std::optional<double> io_wait_pct;

  // A TOTAL row naming kGapMarker, all values empty, records a failed read.
  static constexpr const char* kGapMarker = "<gap>";
  bool is_gap() const { return scope == Scope::kTotal && process == kGapMarker; }
  bool operator==(const Sample&) const = default;
};

inline constexpr const char* kSampleCsvHeader =
    "ts_ms,task_id,scope,process,cpu_pct,mem_pct,rss_bytes,read_Bps,write_Bps,io_wait_pct";

std::string FormatSampleRow(const Sample& s);
// Throws FormatError on rows that do not match the header layout.
Sample ParseSampleRow(std::string_view line, std::size_t line_no);
std::vector<Sample> ReadSamplesCsv(const std::string& path);

struct MonitorConfig {
  double frequency_hz = 1.0;
  std::size_t flush_threshold_records = 512;
  std::vector<std::string> watched_process_names = {"insitu"};
  std::string output_path;
  // Ticks are granted explicitly through MonitorHandle::Advance instead of
  // the wall clock. Sample timestamps are tick_index / frequency either way.
  bool virtual_clock = false;

  void Validate() const;  // throws Error(kConfig)
};

struct FlushReport {
  std::uint64_t total_samples = 0;
  std::uint64_t written_samples = 0;
  std::uint64_t flush_count = 0;
  std::uint64_t threshold_flushes = 0;
  std::uint64_t final_flush_rows = 0;
  std::uint64_t dropped = 0;
  std::uint64_t gap_rows = 0;
  std::uint64_t max_buffered = 0;
  std::uint64_t ticks = 0;
  std::uint64_t skipped_ticks = 0;  // real-time overruns

  bool operator==(const FlushReport&) const = default;
};

using LineFragment = std::variant<SystemFragment, ProcessFragment>;

// Keeps summary lines and rows of watched processes from top/iotop batch
// output; everything else yields nullopt.
std::optional<LineFragment> FilterLine(std::string_view line,
                                       const std::vector<std::string>& watched);

bool MatchesWatched(std::string_view name, const std::vector<std::string>& watched);

// A running monitor: one sampler thread per source, one buffered writer.
class MonitorHandle {
 public:
  ~MonitorHandle();
  MonitorHandle(const MonitorHandle&) = delete;
  MonitorHandle& operator=(const MonitorHandle&) = delete;

  // Virtual-clock mode only: every sampler takes `ticks` more samples; returns
  // once they are buffered.
  void Advance(std::uint64_t ticks);

  // Stops sampling, drains the buffer and closes the file. Idempotent.
  FlushReport Stop();

  const MonitorConfig& config() const { return config_; }

 private:
  friend std::unique_ptr<MonitorHandle> StartMonitor(MonitorConfig,
                                                     std::vector<std::unique_ptr<StatSource>>,
                                                     TaskRegister&);
  MonitorHandle(MonitorConfig config, std::vector<std::unique_ptr<StatSource>> sources,
                TaskRegister& reg, std::FILE* out);

  void SamplerLoop(std::size_t index);
  void Emit(std::uint64_t tick, const std::optional<TickFragments>& frags);
  void Push(Sample s);
  void FlushLocked();

  MonitorConfig config_;
  std::vector<std::unique_ptr<StatSource>> sources_;
  TaskRegister& register_;
  std::FILE* out_;
  double cores_;

  std::mutex mu_;  // buffer, file, report
  std::vector<Sample> buffer_;
  FlushReport report_;

  std::mutex clock_mu_;  // stop flag and virtual-clock state
  std::condition_variable clock_cv_;
  bool stopping_ = false;
  std::uint64_t granted_ = 0;
  std::uint64_t turn_ = 0;  // next (tick * sources + index) allowed to sample

  std::vector<std::thread> threads_;
  std::mutex stop_mu_;
  bool stopped_ = false;
  FlushReport final_;
};

// Opens the output (writing the header) before any sampling starts; throws
// Error(kMonitor) if it is unwritable and Error(kConfig) on a bad config.
std::unique_ptr<MonitorHandle> StartMonitor(MonitorConfig config,
                                            std::vector<std::unique_ptr<StatSource>> sources,
                                            TaskRegister& reg);

}  // namespace insitu
