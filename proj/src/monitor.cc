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

#include "insitu/monitor.h"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>

#include "insitu/csv.h"
#include "insitu/error.h"
#include "insitu/value.h"

namespace insitu {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Commas and line breaks cannot appear inside an unquoted field.
std::string CsvSafe(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == ',') c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

void AppendOpt(std::string& row, const std::optional<double>& v) {
  row += ',';
  if (v) row += FormatNumber(*v);
}

std::optional<double> ClampOpt(std::optional<double> v, double hi) {
  if (!v) return v;
  if (std::isnan(*v)) return std::nullopt;
  return std::clamp(*v, 0.0, hi);
}

std::optional<double> NonNegative(std::optional<double> v) {
  if (!v || std::isnan(*v)) return std::nullopt;
  return std::max(*v, 0.0);
}

}  // namespace

void TaskRegister::Set(std::string task_id) {
  std::lock_guard lock(mu_);
  current_ = std::move(task_id);
  ++generation_;
}

std::string TaskRegister::Get() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::uint64_t TaskRegister::generation() const {
  std::lock_guard lock(mu_);
  return generation_;
}

std::string FormatSampleRow(const Sample& s) {
  std::string row = std::to_string(s.ts_ms);
  row += ',';
  row += CsvSafe(s.task_id);
  row += s.scope == Scope::kTotal ? ",TOTAL," : ",PROC,";
  row += CsvSafe(s.process);
  AppendOpt(row, s.cpu_pct);
  AppendOpt(row, s.mem_pct);
  row += ',';
  if (s.rss_bytes) row += std::to_string(*s.rss_bytes);
  AppendOpt(row, s.read_Bps);
  AppendOpt(row, s.write_Bps);
  AppendOpt(row, s.io_wait_pct);
  return row;
}

Sample ParseSampleRow(std::string_view line, std::size_t line_no) {
  std::vector<std::string_view> f;
  SplitFields(line, f);
  if (f.size() != 10) throw FormatError(line_no, "expected 10 sample fields");
  Sample s;
  auto num = [&](std::string_view text) -> std::optional<double> {
    if (text.empty()) return std::nullopt;
    double v;
    if (!ParseNumber(text, v)) throw FormatError(line_no, "bad number '" + std::string(text) + "'");
    return v;
  };
  auto ts = num(f[0]);
  if (!ts) throw FormatError(line_no, "missing timestamp");
  s.ts_ms = static_cast<std::int64_t>(*ts);
  s.task_id = std::string(f[1]);
  if (f[2] == "TOTAL") s.scope = Scope::kTotal;
  else if (f[2] == "PROC") s.scope = Scope::kProcess;
  else throw FormatError(line_no, "bad scope '" + std::string(f[2]) + "'");
  s.process = std::string(f[3]);
  s.cpu_pct = num(f[4]);
  s.mem_pct = num(f[5]);
  if (auto rss = num(f[6])) s.rss_bytes = static_cast<std::uint64_t>(*rss);
  s.read_Bps = num(f[7]);
  s.write_Bps = num(f[8]);
  s.io_wait_pct = num(f[9]);
  return s;
}

std::vector<Sample> ReadSamplesCsv(const std::string& path) {
  LineReader reader(path);
  std::vector<Sample> out;
  std::string_view line;
  std::uint64_t begin;
  std::size_t line_no = 0;
  while (reader.Next(line, begin)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kSampleCsvHeader) throw FormatError(1, "unexpected samples header");
      continue;
    }
    if (line.empty()) continue;
    out.push_back(ParseSampleRow(line, line_no));
  }
  return out;
}

void MonitorConfig::Validate() const {
  if (!(frequency_hz > 0) || !std::isfinite(frequency_hz)) {
    throw Error(ErrorKind::kConfig, "monitor frequency must be positive");
  }
  if (flush_threshold_records < 1) {
    throw Error(ErrorKind::kConfig, "flush threshold must be at least 1");
  }
  if (output_path.empty()) throw Error(ErrorKind::kConfig, "monitor output path is empty");
}

bool MatchesWatched(std::string_view name, const std::vector<std::string>& watched) {
  std::string lc = Lower(name);
  return std::any_of(watched.begin(), watched.end(), [&](const std::string& w) {
    return !w.empty() && lc.find(Lower(w)) != std::string::npos;
  });
}

std::optional<LineFragment> FilterLine(std::string_view line,
                                       const std::vector<std::string>& watched) {
  if (auto cpu = ParseTopCpuLine(line)) {
    SystemFragment f;
    f.cpu_busy_pct = cpu->busy();
    f.io_wait_pct = cpu->wa;
    return f;
  }
  if (auto mem = ParseTopMemLine(line)) {
    SystemFragment f;
    f.mem_pct = mem->used_pct();
    return f;
  }
  if (auto io = ParseIotopTotalsLine(line)) {
    if (io->actual) return std::nullopt;
    SystemFragment f;
    f.read_Bps = io->read_Bps;
    f.write_Bps = io->write_Bps;
    return f;
  }
  IotopProcess ip;
  if (ParseIotopProcessLine(line, ip) == RowParse::kOk) {
    if (!MatchesWatched(ip.command, watched)) return std::nullopt;
    ProcessFragment f;
    f.pid = ip.tid;
    f.name = ip.command;
    f.io_pct = ip.io_pct;
    if (ip.cumulative) {
      f.read_total_bytes = ip.read;
      f.write_total_bytes = ip.write;
    } else {
      f.read_Bps = ip.read;
      f.write_Bps = ip.write;
    }
    return f;
  }
  TopProcess tp;
  if (ParseTopProcessLine(line, tp) == RowParse::kOk) {
    if (!MatchesWatched(tp.command, watched)) return std::nullopt;
    ProcessFragment f;
    f.pid = tp.pid;
    f.name = tp.command;
    f.cpu_pct = tp.cpu_pct;
    f.mem_pct = tp.mem_pct;
    f.rss_bytes = tp.rss_bytes;
    return f;
  }
  return std::nullopt;
}

// ---- MonitorHandle ---------------------------------------------------------

MonitorHandle::MonitorHandle(MonitorConfig config,
                             std::vector<std::unique_ptr<StatSource>> sources,
                             TaskRegister& reg, std::FILE* out)
    : config_(std::move(config)),
      sources_(std::move(sources)),
      register_(reg),
      out_(out),
      cores_(std::max(1u, std::thread::hardware_concurrency())) {
  buffer_.reserve(config_.flush_threshold_records);
}

std::unique_ptr<MonitorHandle> StartMonitor(MonitorConfig config,
                                            std::vector<std::unique_ptr<StatSource>> sources,
                                            TaskRegister& reg) {
  config.Validate();
  if (sources.empty()) throw Error(ErrorKind::kConfig, "monitor needs at least one source");
  std::FILE* out = std::fopen(config.output_path.c_str(), "wb");
  if (out == nullptr) {
    throw Error(ErrorKind::kMonitor, "cannot open monitor output " + config.output_path);
  }
  if (std::fprintf(out, "%s\n", kSampleCsvHeader) < 0 || std::fflush(out) != 0) {
    std::fclose(out);
    throw Error(ErrorKind::kMonitor, "cannot write monitor output " + config.output_path);
  }
  std::unique_ptr<MonitorHandle> h(
      new MonitorHandle(std::move(config), std::move(sources), reg, out));
  for (std::size_t i = 0; i < h->sources_.size(); ++i) {
    h->threads_.emplace_back(&MonitorHandle::SamplerLoop, h.get(), i);
  }
  return h;
}

MonitorHandle::~MonitorHandle() { Stop(); }

void MonitorHandle::SamplerLoop(std::size_t index) {
  const std::size_t n = sources_.size();
  const auto period = std::chrono::duration<double>(1.0 / config_.frequency_hz);
  const auto start = std::chrono::steady_clock::now();
  std::uint64_t tick = 0;
  while (true) {
    {
      std::unique_lock lock(clock_mu_);
      if (config_.virtual_clock) {
        clock_cv_.wait(lock, [&] {
          return stopping_ || (tick < granted_ && turn_ == tick * n + index);
        });
        if (stopping_) return;
      } else {
        auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                               period * static_cast<double>(tick));
        if (clock_cv_.wait_until(lock, due, [&] { return stopping_; })) return;
      }
    }
    std::optional<TickFragments> frags;
    try {
      frags = sources_[index]->ReadTick();
    } catch (const std::exception&) {
      frags.reset();
    }
    Emit(tick, frags);
    ++tick;
    if (config_.virtual_clock) {
      std::lock_guard lock(clock_mu_);
      ++turn_;
      clock_cv_.notify_all();
    } else {
      // Overrun: resume at the next future slot rather than bursting.
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start) /
                       period;
      auto next = static_cast<std::uint64_t>(std::floor(elapsed)) + 1;
      if (next > tick) {
        std::lock_guard lock(mu_);
        report_.skipped_ticks += next - tick;
        tick = next;
      }
    }
  }
}

void MonitorHandle::Emit(std::uint64_t tick, const std::optional<TickFragments>& frags) {
  // Tagged here, at read time; the flush may happen much later.
  std::string task = register_.Get();
  const auto ts = static_cast<std::int64_t>(
      std::llround(static_cast<double>(tick) * 1000.0 / config_.frequency_hz));
  std::lock_guard lock(mu_);
  ++report_.ticks;
  Sample total;
  total.ts_ms = ts;
  total.task_id = task;
  total.scope = Scope::kTotal;
  if (!frags) {
    ++report_.gap_rows;
    total.process = Sample::kGapMarker;
    Push(std::move(total));
    return;
  }
  total.cpu_pct = ClampOpt(frags->total.cpu_busy_pct, 100.0);
  total.mem_pct = ClampOpt(frags->total.mem_pct, 100.0);
  total.io_wait_pct = ClampOpt(frags->total.io_wait_pct, 100.0);
  total.read_Bps = NonNegative(frags->total.read_Bps);
  total.write_Bps = NonNegative(frags->total.write_Bps);
  Push(std::move(total));
  for (const auto& p : frags->processes) {
    if (!MatchesWatched(p.name, config_.watched_process_names)) continue;
    Sample s;
    s.ts_ms = ts;
    s.task_id = task;
    s.scope = Scope::kProcess;
    s.process = p.name;
    s.cpu_pct = ClampOpt(p.cpu_pct, 100.0 * cores_);
    s.mem_pct = ClampOpt(p.mem_pct, 100.0);
    s.rss_bytes = p.rss_bytes;
    s.read_Bps = NonNegative(p.read_Bps);
    s.write_Bps = NonNegative(p.write_Bps);
    Push(std::move(s));
  }
}

void MonitorHandle::Push(Sample s) {
  buffer_.push_back(std::move(s));
  ++report_.total_samples;
  report_.max_buffered = std::max<std::uint64_t>(report_.max_buffered, buffer_.size());
  if (buffer_.size() >= config_.flush_threshold_records) {
    FlushLocked();
    ++report_.threshold_flushes;
  }
}

void MonitorHandle::FlushLocked() {
  std::string chunk;
  for (const auto& s : buffer_) {
    chunk += FormatSampleRow(s);
    chunk += '\n';
  }
  if (!chunk.empty() && out_ != nullptr) {
    std::fwrite(chunk.data(), 1, chunk.size(), out_);
    std::fflush(out_);
  }
  report_.written_samples += buffer_.size();
  ++report_.flush_count;
  buffer_.clear();
}

void MonitorHandle::Advance(std::uint64_t ticks) {
  if (!config_.virtual_clock) throw Error(ErrorKind::kConfig, "Advance needs a virtual clock");
  std::unique_lock lock(clock_mu_);
  if (stopping_) return;
  granted_ += ticks;
  clock_cv_.notify_all();
  const std::uint64_t target = granted_ * sources_.size();
  clock_cv_.wait(lock, [&] { return stopping_ || turn_ >= target; });
}

FlushReport MonitorHandle::Stop() {
  std::lock_guard stop_lock(stop_mu_);
  if (stopped_) return final_;
  {
    std::lock_guard lock(clock_mu_);
    stopping_ = true;
  }
  clock_cv_.notify_all();
  for (auto& t : threads_) t.join();
  threads_.clear();
  std::lock_guard lock(mu_);
  report_.final_flush_rows = buffer_.size();
  FlushLocked();
  report_.dropped = report_.total_samples - report_.written_samples;
  if (out_ != nullptr) {
    std::fclose(out_);
    out_ = nullptr;
  }
  stopped_ = true;
  final_ = report_;
  return final_;
}

}  // namespace insitu
