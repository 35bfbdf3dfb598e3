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

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace insitu {

// System-wide readings for one tick. Absent fields are unknown to the source.
struct SystemFragment {
  std::optional<double> cpu_busy_pct;  // busy share of all cores, 0-100
  std::optional<double> mem_pct;       // used / total, 0-100
  std::optional<double> io_wait_pct;
  std::optional<double> read_Bps;
  std::optional<double> write_Bps;

  bool operator==(const SystemFragment&) const = default;
};

struct ProcessFragment {
  int pid = 0;
  std::string name;
  std::optional<double> cpu_pct;  // share of one core, 0-100 x cores
  std::optional<double> mem_pct;
  std::optional<std::uint64_t> rss_bytes;
  std::optional<double> read_Bps;
  std::optional<double> write_Bps;
  std::optional<double> io_pct;
  // Cumulative byte counters as printed by iotop's bare "K" columns.
  std::optional<double> read_total_bytes;
  std::optional<double> write_total_bytes;

  bool operator==(const ProcessFragment&) const = default;
};

struct TickFragments {
  SystemFragment total;
  std::vector<ProcessFragment> processes;

  bool operator==(const TickFragments&) const = default;
};

struct SourceCapabilities {
  bool has_cpu_mem = true;
  bool has_io_wait = false;
  bool has_process_io = false;
};

// Produces one set of fragments per sampling tick. Each instance is driven by
// exactly one sampler thread. ReadTick throws Error(kSourceUnavailable) when
// a reading cannot be taken.
class StatSource {
 public:
  virtual ~StatSource() = default;
  virtual TickFragments ReadTick() = 0;
  virtual SourceCapabilities capabilities() const = 0;
};

// ---- top / iotop batch output -------------------------------------------

struct TopCpu {
  double us = 0, sy = 0, ni = 0, id = 0, wa = 0, hi = 0, si = 0, st = 0;
  double busy() const { return 100.0 - id; }
};

struct TopMem {
  double total_kib = 0, free_kib = 0, used_kib = 0, buff_cache_kib = 0;
  double used_pct() const { return total_kib > 0 ? used_kib / total_kib * 100.0 : 0.0; }
};

struct TopProcess {
  int pid = 0;
  std::string user;
  std::string command;
  double cpu_pct = 0;
  double mem_pct = 0;
  std::uint64_t rss_bytes = 0;
};

struct TopSnapshot {
  std::string header;  // the "top - ..." line, when present
  TopCpu cpu;
  TopMem mem;
  std::vector<TopProcess> processes;
  std::size_t skipped_rows = 0;
};

struct IotopProcess {
  int tid = 0;
  std::string prio;
  std::string user;
  std::string command;
  // Bytes when `cumulative`, bytes per second otherwise.
  double read = 0;
  double write = 0;
  bool cumulative = false;
  double swapin_pct = 0;
  double io_pct = 0;
};

struct IotopSnapshot {
  double total_read_Bps = 0;
  double total_write_Bps = 0;
  std::optional<double> actual_read_Bps;
  std::optional<double> actual_write_Bps;
  std::vector<IotopProcess> processes;
  std::size_t skipped_rows = 0;
};

enum class RowParse { kNotARow, kOk, kMalformed };

std::optional<TopCpu> ParseTopCpuLine(std::string_view line);
std::optional<TopMem> ParseTopMemLine(std::string_view line);
RowParse ParseTopProcessLine(std::string_view line, TopProcess& out);

struct IotopTotals {
  bool actual = false;  // "Actual DISK" rather than "Total DISK"
  double read_Bps = 0;
  double write_Bps = 0;
};
std::optional<IotopTotals> ParseIotopTotalsLine(std::string_view line);
RowParse ParseIotopProcessLine(std::string_view line, IotopProcess& out);

// One refresh block of `top -b`. Throws Error(kParse) when the CPU or memory
// summary line is missing; malformed process rows are skipped and counted.
TopSnapshot ParseTopBlock(std::string_view text);

// One refresh block of `iotop -b`. K/s totals become bytes per second
// (1 K = 1024 bytes); bare-K process columns are cumulative bytes.
IotopSnapshot ParseIotopBlock(std::string_view text);

// ---- sources --------------------------------------------------------------

struct ProcfsOptions {
  std::string proc_root = "/proc";
  std::string sys_block = "/sys/block";
  // Processes whose command name contains one of these (case-insensitive).
  std::vector<std::string> watched;
  bool cpu_mem = true;
  bool io = true;
};

// Live Linux readings straight from procfs. Rates are deltas between
// consecutive reads divided by the measured interval.
class ProcfsSource : public StatSource {
 public:
  explicit ProcfsSource(ProcfsOptions options);

  TickFragments ReadTick() override;
  SourceCapabilities capabilities() const override;

 private:
  struct CpuTimes {
    std::uint64_t idle = 0, iowait = 0, total = 0;
  };
  struct ProcState {
    std::string comm;
    bool watched = false;
    bool seen = false;
    std::uint64_t jiffies = 0;
    std::uint64_t rchar = 0, wchar = 0;
    bool has_io = false;
  };
  struct DiskTimes {
    std::uint64_t read_sectors = 0, write_sectors = 0;
  };

  CpuTimes ReadCpu() const;
  std::optional<DiskTimes> ReadDisks() const;
  double MemTotalKib(double& used_pct) const;

  ProcfsOptions options_;
  long clk_tck_;
  long page_size_;
  int cores_;
  std::chrono::steady_clock::time_point last_;
  CpuTimes last_cpu_;
  std::optional<DiskTimes> last_disk_;
  std::map<int, ProcState> procs_;
};

// Replays a fixed script; after the script ends every tick is all zeros.
class SyntheticSource : public StatSource {
 public:
  explicit SyntheticSource(std::vector<TickFragments> script)
      : script_(std::move(script)) {}

  // Deterministic script for `seed`: smooth CPU/IO waves plus one fragment
  // per named process.
  static std::vector<TickFragments> Generate(std::uint64_t seed, std::size_t ticks,
                                             const std::vector<std::string>& processes);
  static TickFragments Zero();

  TickFragments ReadTick() override;
  SourceCapabilities capabilities() const override;

 private:
  std::vector<TickFragments> script_;
  std::size_t next_ = 0;
};

// Feeds captured top/iotop batch output tick by tick. A top block directly
// followed by an iotop block forms one tick. Cumulative iotop columns are
// differenced against the previous block using `period_s`.
class ReplaySource : public StatSource {
 public:
  ReplaySource(std::string_view captured, double period_s);
  static ReplaySource FromFile(const std::string& path, double period_s);

  std::size_t block_count() const { return blocks_.size(); }
  // Ticks until the capture is exhausted.
  std::size_t tick_count() const;
  TickFragments ReadTick() override;
  SourceCapabilities capabilities() const override;

 private:
  struct Block {
    bool is_top;
    std::string text;
  };
  std::vector<Block> blocks_;
  std::size_t next_ = 0;
  double period_s_;
  std::map<int, std::pair<double, double>> last_io_;
};

}  // namespace insitu
