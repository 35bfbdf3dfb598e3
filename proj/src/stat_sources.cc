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

#include "insitu/stat_sources.h"

#include <dirent.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "insitu/error.h"
#include "insitu/value.h"

namespace insitu {
namespace {

std::vector<std::string_view> Tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view TrimLeft(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

bool StartsWithNoCase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  return Lower(s.substr(0, prefix.size())) == Lower(prefix);
}

// Reads "<number> <key>" pairs separated by commas after the first ':'.
std::map<std::string, double> SummaryPairs(std::string_view line) {
  std::map<std::string, double> out;
  auto colon = line.find(':');
  if (colon == std::string_view::npos) return out;
  std::string rest(line.substr(colon + 1));
  std::replace(rest.begin(), rest.end(), ',', ' ');
  auto toks = Tokens(rest);
  for (std::size_t i = 0; i + 1 < toks.size(); ++i) {
    std::string_view num = toks[i];
    double scale = 1.0;
    if (!num.empty() && (num.back() == 'k' || num.back() == 'K')) num.remove_suffix(1);
    double v;
    if (!ParseNumber(num, v)) continue;
    out.emplace(Lower(toks[i + 1]), v * scale);
    ++i;
  }
  return out;
}

// Top memory columns may carry a unit suffix; the result is KiB.
bool ParseKibField(std::string_view tok, double& kib) {
  double scale = 1.0;
  if (!tok.empty()) {
    switch (std::tolower(static_cast<unsigned char>(tok.back()))) {
      case 'k': scale = 1.0; tok.remove_suffix(1); break;
      case 'm': scale = 1024.0; tok.remove_suffix(1); break;
      case 'g': scale = 1024.0 * 1024.0; tok.remove_suffix(1); break;
      case 't': scale = 1024.0 * 1024.0 * 1024.0; tok.remove_suffix(1); break;
      default: break;
    }
  }
  double v;
  if (!ParseNumber(tok, v)) return false;
  kib = v * scale;
  return true;
}

bool ParseInt(std::string_view tok, int& out) {
  if (tok.empty()) return false;
  long v = 0;
  for (char c : tok) {
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
    if (v > 1L << 30) return false;
  }
  out = static_cast<int>(v);
  return true;
}

std::string Join(const std::vector<std::string_view>& toks, std::size_t from) {
  std::string out;
  for (std::size_t i = from; i < toks.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += toks[i];
  }
  return out;
}

// Bytes (or bytes/s) multiplier for an iotop unit token such as "K" or "M/s".
bool IotopUnit(std::string_view unit, double& scale, bool& rate) {
  rate = false;
  if (unit.size() > 2 && unit.substr(unit.size() - 2) == "/s") {
    rate = true;
    unit.remove_suffix(2);
  }
  if (unit == "B") scale = 1.0;
  else if (unit == "K") scale = 1024.0;
  else if (unit == "M") scale = 1024.0 * 1024.0;
  else if (unit == "G") scale = 1024.0 * 1024.0 * 1024.0;
  else return false;
  return true;
}

std::vector<std::string_view> Lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i <= text.size()) {
    auto nl = text.find('\n', i);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(i, nl - i);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    i = nl + 1;
  }
  return out;
}

std::string ReadSmallFile(const std::string& path, bool& ok) {
  std::ifstream in(path, std::ios::binary);
  ok = static_cast<bool>(in);
  if (!ok) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool IsTopHeader(std::string_view line) { return line.rfind("top - ", 0) == 0; }
bool IsIotopHeader(std::string_view line) {
  return TrimLeft(line).rfind("Total DISK READ", 0) == 0;
}

}  // namespace

std::optional<TopCpu> ParseTopCpuLine(std::string_view line) {
  line = TrimLeft(line);
  if (!StartsWithNoCase(line, "%cpu(s)")) return std::nullopt;
  auto pairs = SummaryPairs(line);
  if (!pairs.count("id")) return std::nullopt;
  auto get = [&](const char* key) {
    auto it = pairs.find(key);
    return it == pairs.end() ? 0.0 : it->second;
  };
  TopCpu cpu;
  cpu.us = get("us");
  cpu.sy = get("sy");
  cpu.ni = get("ni");
  cpu.id = get("id");
  cpu.wa = get("wa");
  cpu.hi = get("hi");
  cpu.si = get("si");
  cpu.st = get("st");
  return cpu;
}

std::optional<TopMem> ParseTopMemLine(std::string_view line) {
  line = TrimLeft(line);
  double scale;
  if (StartsWithNoCase(line, "KiB Mem")) scale = 1.0;
  else if (StartsWithNoCase(line, "MiB Mem")) scale = 1024.0;
  else if (StartsWithNoCase(line, "GiB Mem")) scale = 1024.0 * 1024.0;
  else if (StartsWithNoCase(line, "Mem:")) scale = 1.0;
  else return std::nullopt;
  auto pairs = SummaryPairs(line);
  auto total = pairs.find("total");
  if (total == pairs.end()) return std::nullopt;
  auto get = [&](const char* key) {
    auto it = pairs.find(key);
    return it == pairs.end() ? 0.0 : it->second * scale;
  };
  TopMem mem;
  mem.total_kib = total->second * scale;
  mem.free_kib = get("free");
  mem.used_kib = get("used");
  mem.buff_cache_kib = get("buff/cache");
  return mem;
}

RowParse ParseTopProcessLine(std::string_view line, TopProcess& out) {
  auto toks = Tokens(line);
  int pid;
  if (toks.empty() || !ParseInt(toks[0], pid)) return RowParse::kNotARow;
  // PID USER PR NI VIRT RES SHR S %CPU %MEM TIME+ COMMAND...
  if (toks.size() < 12) return RowParse::kMalformed;
  double res_kib, cpu, mem;
  if (!ParseKibField(toks[5], res_kib) || !ParseNumber(toks[8], cpu) ||
      !ParseNumber(toks[9], mem)) {
    return RowParse::kMalformed;
  }
  for (std::size_t i = 2; i <= 9; ++i) {
    if (toks[i].front() == '-' && i != 3) return RowParse::kMalformed;  // NI may be negative
  }
  if (res_kib < 0 || cpu < 0 || mem < 0) return RowParse::kMalformed;
  out.pid = pid;
  out.user = std::string(toks[1]);
  out.cpu_pct = cpu;
  out.mem_pct = mem;
  out.rss_bytes = static_cast<std::uint64_t>(std::llround(res_kib * 1024.0));
  out.command = Join(toks, 11);
  return RowParse::kOk;
}

std::optional<IotopTotals> ParseIotopTotalsLine(std::string_view line) {
  line = TrimLeft(line);
  IotopTotals t;
  if (line.rfind("Total DISK READ", 0) == 0) t.actual = false;
  else if (line.rfind("Actual DISK READ", 0) == 0) t.actual = true;
  else return std::nullopt;
  auto bar = line.find('|');
  if (bar == std::string_view::npos) return std::nullopt;
  auto value = [](std::string_view part, double& out) {
    auto colon = part.find(':');
    if (colon == std::string_view::npos) return false;
    auto toks = Tokens(part.substr(colon + 1));
    if (toks.size() < 2) return false;
    double v, scale;
    bool rate;
    if (!ParseNumber(toks[0], v) || v < 0 || !IotopUnit(toks[1], scale, rate)) return false;
    out = v * scale;
    return true;
  };
  if (!value(line.substr(0, bar), t.read_Bps) || !value(line.substr(bar + 1), t.write_Bps)) {
    return std::nullopt;
  }
  return t;
}

RowParse ParseIotopProcessLine(std::string_view line, IotopProcess& out) {
  auto toks = Tokens(line);
  int tid;
  if (toks.size() < 2 || !ParseInt(toks[0], tid) ||
      toks[1].find('/') == std::string_view::npos) {
    return RowParse::kNotARow;
  }
  // TID PRIO USER READ UNIT WRITE UNIT SWAPIN % IO % COMMAND...
  if (toks.size() < 12) return RowParse::kMalformed;
  double read, write, swapin, io, rscale, wscale;
  bool rrate, wrate;
  if (!ParseNumber(toks[3], read) || !IotopUnit(toks[4], rscale, rrate) ||
      !ParseNumber(toks[5], write) || !IotopUnit(toks[6], wscale, wrate) ||
      !ParseNumber(toks[7], swapin) || toks[8] != "%" || !ParseNumber(toks[9], io) ||
      toks[10] != "%" || rrate != wrate) {
    return RowParse::kMalformed;
  }
  if (read < 0 || write < 0 || swapin < 0 || io < 0) return RowParse::kMalformed;
  out.tid = tid;
  out.prio = std::string(toks[1]);
  out.user = std::string(toks[2]);
  out.read = read * rscale;
  out.write = write * wscale;
  out.cumulative = !rrate;
  out.swapin_pct = swapin;
  out.io_pct = io;
  out.command = Join(toks, 11);
  return RowParse::kOk;
}

TopSnapshot ParseTopBlock(std::string_view text) {
  TopSnapshot snap;
  bool have_cpu = false, have_mem = false, in_rows = false;
  for (std::string_view line : Lines(text)) {
    if (IsTopHeader(line)) {
      snap.header = std::string(line);
      continue;
    }
    if (!in_rows) {
      if (auto cpu = ParseTopCpuLine(line)) {
        snap.cpu = *cpu;
        have_cpu = true;
        continue;
      }
      if (auto mem = ParseTopMemLine(line)) {
        snap.mem = *mem;
        have_mem = true;
        continue;
      }
      auto toks = Tokens(line);
      if (!toks.empty() && toks[0] == "PID") in_rows = true;
      continue;
    }
    if (TrimLeft(line).empty()) continue;
    TopProcess p;
    switch (ParseTopProcessLine(line, p)) {
      case RowParse::kOk: snap.processes.push_back(std::move(p)); break;
      case RowParse::kMalformed:
      case RowParse::kNotARow: ++snap.skipped_rows; break;
    }
  }
  if (!have_cpu) throw Error(ErrorKind::kParse, "top block has no %Cpu(s) summary line");
  if (!have_mem) throw Error(ErrorKind::kParse, "top block has no memory summary line");
  return snap;
}

IotopSnapshot ParseIotopBlock(std::string_view text) {
  IotopSnapshot snap;
  bool have_total = false;
  for (std::string_view line : Lines(text)) {
    if (TrimLeft(line).empty()) continue;
    if (auto t = ParseIotopTotalsLine(line)) {
      if (t->actual) {
        snap.actual_read_Bps = t->read_Bps;
        snap.actual_write_Bps = t->write_Bps;
      } else {
        snap.total_read_Bps = t->read_Bps;
        snap.total_write_Bps = t->write_Bps;
        have_total = true;
      }
      continue;
    }
    auto toks = Tokens(line);
    if (!toks.empty() && toks[0] == "TID") continue;
    IotopProcess p;
    switch (ParseIotopProcessLine(line, p)) {
      case RowParse::kOk: snap.processes.push_back(std::move(p)); break;
      case RowParse::kMalformed:
      case RowParse::kNotARow: ++snap.skipped_rows; break;
    }
  }
  if (!have_total) throw Error(ErrorKind::kParse, "iotop block has no Total DISK READ line");
  return snap;
}

// ---- procfs ----------------------------------------------------------------

ProcfsSource::ProcfsSource(ProcfsOptions options)
    : options_(std::move(options)),
      clk_tck_(sysconf(_SC_CLK_TCK)),
      page_size_(sysconf(_SC_PAGESIZE)),
      cores_(std::max(1u, std::thread::hardware_concurrency())) {
  bool ok;
  ReadSmallFile(options_.proc_root + "/stat", ok);
  if (!ok) {
    throw Error(ErrorKind::kSourceUnavailable,
                "cannot read " + options_.proc_root + "/stat");
  }
  if (clk_tck_ <= 0) clk_tck_ = 100;
  if (page_size_ <= 0) page_size_ = 4096;
  last_cpu_ = ReadCpu();
  last_disk_ = ReadDisks();
  last_ = std::chrono::steady_clock::now();
}

SourceCapabilities ProcfsSource::capabilities() const {
  return {options_.cpu_mem, options_.cpu_mem, options_.io};
}

ProcfsSource::CpuTimes ProcfsSource::ReadCpu() const {
  bool ok;
  std::string text = ReadSmallFile(options_.proc_root + "/stat", ok);
  if (!ok) {
    throw Error(ErrorKind::kSourceUnavailable, "cannot read " + options_.proc_root + "/stat");
  }
  auto nl = text.find('\n');
  auto toks = Tokens(std::string_view(text).substr(0, nl));
  if (toks.empty() || toks[0] != "cpu") {
    throw Error(ErrorKind::kSourceUnavailable, "unexpected /proc/stat layout");
  }
  CpuTimes t;
  // user nice system idle iowait irq softirq steal (guest time is inside user)
  for (std::size_t i = 1; i < toks.size() && i <= 8; ++i) {
    std::uint64_t v = std::strtoull(std::string(toks[i]).c_str(), nullptr, 10);
    t.total += v;
    if (i == 4) t.idle = v;
    if (i == 5) t.iowait = v;
  }
  return t;
}

std::optional<ProcfsSource::DiskTimes> ProcfsSource::ReadDisks() const {
  if (!options_.io) return std::nullopt;
  bool ok;
  std::string text = ReadSmallFile(options_.proc_root + "/diskstats", ok);
  if (!ok) return std::nullopt;
  DIR* dir = opendir(options_.sys_block.c_str());
  std::vector<std::string> devices;
  if (dir) {
    while (dirent* e = readdir(dir)) devices.emplace_back(e->d_name);
    closedir(dir);
  }
  auto excluded = [](std::string_view n) {
    return n.rfind("loop", 0) == 0 || n.rfind("ram", 0) == 0 || n.rfind("zram", 0) == 0;
  };
  DiskTimes d;
  for (std::string_view line : Lines(text)) {
    auto toks = Tokens(line);
    if (toks.size() < 10) continue;
    std::string name(toks[2]);
    if (excluded(name)) continue;
    // Whole devices only: partitions would double count.
    if (dir && std::find(devices.begin(), devices.end(), name) == devices.end()) continue;
    d.read_sectors += std::strtoull(std::string(toks[5]).c_str(), nullptr, 10);
    d.write_sectors += std::strtoull(std::string(toks[9]).c_str(), nullptr, 10);
  }
  return d;
}

double ProcfsSource::MemTotalKib(double& used_pct) const {
  bool ok;
  std::string text = ReadSmallFile(options_.proc_root + "/meminfo", ok);
  used_pct = -1;
  if (!ok) return 0;
  double total = 0, avail = -1, free = 0, buffers = 0, cached = 0;
  for (std::string_view line : Lines(text)) {
    auto toks = Tokens(line);
    if (toks.size() < 2) continue;
    double v = std::strtod(std::string(toks[1]).c_str(), nullptr);
    if (toks[0] == "MemTotal:") total = v;
    else if (toks[0] == "MemAvailable:") avail = v;
    else if (toks[0] == "MemFree:") free = v;
    else if (toks[0] == "Buffers:") buffers = v;
    else if (toks[0] == "Cached:") cached = v;
  }
  if (avail < 0) avail = free + buffers + cached;
  if (total > 0) used_pct = std::clamp((total - avail) / total * 100.0, 0.0, 100.0);
  return total;
}

TickFragments ProcfsSource::ReadTick() {
  auto now = std::chrono::steady_clock::now();
  double dt = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  TickFragments out;

  double mem_total_kib = 0;
  if (options_.cpu_mem) {
    CpuTimes cpu = ReadCpu();
    std::uint64_t dtotal = cpu.total >= last_cpu_.total ? cpu.total - last_cpu_.total : 0;
    std::uint64_t didle = cpu.idle >= last_cpu_.idle ? cpu.idle - last_cpu_.idle : 0;
    std::uint64_t dwait = cpu.iowait >= last_cpu_.iowait ? cpu.iowait - last_cpu_.iowait : 0;
    if (dtotal == 0) {
      out.total.cpu_busy_pct = 0.0;
      out.total.io_wait_pct = 0.0;
    } else {
      double total = static_cast<double>(dtotal);
      out.total.cpu_busy_pct = std::clamp((1.0 - didle / total) * 100.0, 0.0, 100.0);
      out.total.io_wait_pct = std::clamp(dwait / total * 100.0, 0.0, 100.0);
    }
    last_cpu_ = cpu;
    double used_pct;
    mem_total_kib = MemTotalKib(used_pct);
    if (used_pct >= 0) out.total.mem_pct = used_pct;
  }
  if (options_.io) {
    auto disk = ReadDisks();
    if (disk && last_disk_ && dt > 0) {
      auto delta = [](std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : 0; };
      out.total.read_Bps = delta(disk->read_sectors, last_disk_->read_sectors) * 512.0 / dt;
      out.total.write_Bps = delta(disk->write_sectors, last_disk_->write_sectors) * 512.0 / dt;
    }
    last_disk_ = disk;
  }

  if (options_.watched.empty()) return out;
  std::vector<std::string> watched;
  for (const auto& w : options_.watched) watched.push_back(Lower(w));

  for (auto& [pid, st] : procs_) st.seen = false;
  DIR* dir = opendir(options_.proc_root.c_str());
  if (!dir) throw Error(ErrorKind::kSourceUnavailable, "cannot list " + options_.proc_root);
  std::vector<int> pids;
  while (dirent* e = readdir(dir)) {
    int pid;
    if (ParseInt(e->d_name, pid)) pids.push_back(pid);
  }
  closedir(dir);
  std::sort(pids.begin(), pids.end());

  for (int pid : pids) {
    const std::string base = options_.proc_root + "/" + std::to_string(pid);
    auto it = procs_.find(pid);
    bool fresh = it == procs_.end();
    if (fresh) {
      bool ok;
      std::string comm = ReadSmallFile(base + "/comm", ok);
      if (!ok) continue;
      while (!comm.empty() && (comm.back() == '\n' || comm.back() == '\r')) comm.pop_back();
      ProcState st;
      std::string lc = Lower(comm);
      st.watched = std::any_of(watched.begin(), watched.end(), [&](const std::string& w) {
        return lc.find(w) != std::string::npos;
      });
      st.comm = std::move(comm);
      it = procs_.emplace(pid, std::move(st)).first;
    }
    ProcState& st = it->second;
    st.seen = true;
    if (!st.watched) continue;

    ProcessFragment frag;
    frag.pid = pid;
    frag.name = st.comm;
    if (options_.cpu_mem) {
      bool ok;
      std::string stat = ReadSmallFile(base + "/stat", ok);
      auto paren = stat.rfind(')');
      if (!ok || paren == std::string::npos) continue;  // exited
      auto toks = Tokens(std::string_view(stat).substr(paren + 1));
      // After ')': state(0) ... utime(11) stime(12)
      if (toks.size() < 13) continue;
      std::uint64_t jiffies = std::strtoull(std::string(toks[11]).c_str(), nullptr, 10) +
                              std::strtoull(std::string(toks[12]).c_str(), nullptr, 10);
      if (!fresh && dt > 0 && jiffies >= st.jiffies) {
        double pct = (jiffies - st.jiffies) / (static_cast<double>(clk_tck_) * dt) * 100.0;
        frag.cpu_pct = std::clamp(pct, 0.0, 100.0 * cores_);
      }
      st.jiffies = jiffies;
      std::string statm = ReadSmallFile(base + "/statm", ok);
      if (!ok) continue;
      auto mt = Tokens(statm);
      if (mt.size() >= 2) {
        std::uint64_t rss = std::strtoull(std::string(mt[1]).c_str(), nullptr, 10) *
                            static_cast<std::uint64_t>(page_size_);
        frag.rss_bytes = rss;
        if (mem_total_kib > 0) {
          frag.mem_pct = std::clamp(rss / (mem_total_kib * 1024.0) * 100.0, 0.0, 100.0);
        }
      }
    }
    if (options_.io) {
      bool ok;
      std::string io = ReadSmallFile(base + "/io", ok);
      if (ok) {
        std::uint64_t rchar = 0, wchar = 0;
        for (std::string_view line : Lines(io)) {
          auto toks = Tokens(line);
          if (toks.size() < 2) continue;
          if (toks[0] == "rchar:") rchar = std::strtoull(std::string(toks[1]).c_str(), nullptr, 10);
          if (toks[0] == "wchar:") wchar = std::strtoull(std::string(toks[1]).c_str(), nullptr, 10);
        }
        if (st.has_io && dt > 0 && rchar >= st.rchar && wchar >= st.wchar) {
          frag.read_Bps = (rchar - st.rchar) / dt;
          frag.write_Bps = (wchar - st.wchar) / dt;
        }
        st.rchar = rchar;
        st.wchar = wchar;
        st.has_io = true;
      }
    }
    out.processes.push_back(std::move(frag));
  }
  for (auto it = procs_.begin(); it != procs_.end();) {
    it = it->second.seen ? std::next(it) : procs_.erase(it);
  }
  return out;
}

// ---- synthetic ---------------------------------------------------------------

TickFragments SyntheticSource::Zero() {
  TickFragments z;
  z.total.cpu_busy_pct = 0.0;
  z.total.mem_pct = 0.0;
  z.total.io_wait_pct = 0.0;
  z.total.read_Bps = 0.0;
  z.total.write_Bps = 0.0;
  return z;
}

TickFragments SyntheticSource::ReadTick() {
  if (next_ < script_.size()) return script_[next_++];
  return Zero();
}

SourceCapabilities SyntheticSource::capabilities() const { return {true, true, true}; }

std::vector<TickFragments> SyntheticSource::Generate(std::uint64_t seed, std::size_t ticks,
                                                     const std::vector<std::string>& processes) {
  std::mt19937_64 rng(seed);
  // Uniform [0,1) from the top 53 bits; distribution objects are not portable.
  auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto round2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  std::vector<TickFragments> script;
  script.reserve(ticks);
  double phase = uniform() * 6.283185307179586;
  for (std::size_t t = 0; t < ticks; ++t) {
    double wave = 0.5 + 0.5 * std::sin(phase + static_cast<double>(t) / 7.0);
    TickFragments f;
    f.total.cpu_busy_pct = round2(std::clamp(15.0 + 60.0 * wave + 10.0 * uniform(), 0.0, 100.0));
    f.total.mem_pct = round2(20.0 + 5.0 * wave);
    f.total.io_wait_pct = round2(10.0 * (1.0 - wave) * uniform());
    f.total.read_Bps = std::round(50e6 * (1.0 - wave) * uniform());
    f.total.write_Bps = std::round(5e6 * uniform());
    int pid = 1000;
    for (const auto& name : processes) {
      ProcessFragment p;
      p.pid = pid++;
      p.name = name;
      p.cpu_pct = round2(std::clamp(90.0 * wave + 5.0 * uniform(), 0.0, 100.0));
      p.rss_bytes = static_cast<std::uint64_t>(64e6 + 32e6 * wave);
      p.mem_pct = round2(*p.rss_bytes / 16e9 * 100.0);
      p.read_Bps = std::round(*f.total.read_Bps * 0.8);
      p.write_Bps = std::round(*f.total.write_Bps * 0.5);
      f.processes.push_back(std::move(p));
    }
    script.push_back(std::move(f));
  }
  return script;
}

// ---- replay ------------------------------------------------------------------

ReplaySource::ReplaySource(std::string_view captured, double period_s) : period_s_(period_s) {
  if (!(period_s > 0)) throw Error(ErrorKind::kConfig, "replay period must be positive");
  Block* current = nullptr;
  for (std::string_view line : Lines(captured)) {
    if (IsTopHeader(line) || IsIotopHeader(line)) {
      blocks_.push_back({IsTopHeader(line), {}});
      current = &blocks_.back();
    }
    if (!current) continue;
    current->text.append(line);
    current->text.push_back('\n');
  }
}

ReplaySource ReplaySource::FromFile(const std::string& path, double period_s) {
  bool ok;
  std::string text = ReadSmallFile(path, ok);
  if (!ok) throw Error(ErrorKind::kSourceUnavailable, "cannot read replay file " + path);
  return ReplaySource(text, period_s);
}

std::size_t ReplaySource::tick_count() const {
  std::size_t ticks = 0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    // An iotop block directly after a top block shares its tick.
    if (blocks_[i].is_top || i == 0 || !blocks_[i - 1].is_top) ++ticks;
  }
  return ticks;
}

SourceCapabilities ReplaySource::capabilities() const { return {true, true, true}; }

TickFragments ReplaySource::ReadTick() {
  if (next_ >= blocks_.size()) return SyntheticSource::Zero();
  TickFragments out;
  std::map<int, std::size_t> by_pid;
  auto proc = [&](int pid, const std::string& name) -> ProcessFragment& {
    auto it = by_pid.find(pid);
    if (it != by_pid.end()) return out.processes[it->second];
    by_pid[pid] = out.processes.size();
    ProcessFragment& p = out.processes.emplace_back();
    p.pid = pid;
    p.name = name;
    return p;
  };

  if (blocks_[next_].is_top) {
    TopSnapshot top = ParseTopBlock(blocks_[next_++].text);
    out.total.cpu_busy_pct = std::clamp(top.cpu.busy(), 0.0, 100.0);
    out.total.io_wait_pct = top.cpu.wa;
    out.total.mem_pct = top.mem.used_pct();
    for (const auto& tp : top.processes) {
      ProcessFragment& p = proc(tp.pid, tp.command);
      p.cpu_pct = tp.cpu_pct;
      p.mem_pct = tp.mem_pct;
      p.rss_bytes = tp.rss_bytes;
    }
  }
  if (next_ < blocks_.size() && !blocks_[next_].is_top) {
    IotopSnapshot io = ParseIotopBlock(blocks_[next_++].text);
    out.total.read_Bps = io.total_read_Bps;
    out.total.write_Bps = io.total_write_Bps;
    std::map<int, std::pair<double, double>> seen;
    for (const auto& ip : io.processes) {
      ProcessFragment& p = proc(ip.tid, ip.command);
      p.io_pct = ip.io_pct;
      if (ip.cumulative) {
        p.read_total_bytes = ip.read;
        p.write_total_bytes = ip.write;
        auto prev = last_io_.find(ip.tid);
        if (prev != last_io_.end() && ip.read >= prev->second.first &&
            ip.write >= prev->second.second) {
          p.read_Bps = (ip.read - prev->second.first) / period_s_;
          p.write_Bps = (ip.write - prev->second.second) / period_s_;
        }
        seen[ip.tid] = {ip.read, ip.write};
      } else {
        p.read_Bps = ip.read;
        p.write_Bps = ip.write;
      }
    }
    last_io_ = std::move(seen);
  }
  return out;
}

}  // namespace insitu
