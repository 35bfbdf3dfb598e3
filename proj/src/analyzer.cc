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

#include "insitu/analyzer.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "insitu/error.h"
#include "insitu/value.h"

namespace insitu {

void SystemSpec::Validate() const {
  if (cores <= 0 || !(ram_bytes > 0) || !(max_read_Bps > 0) || !(max_write_Bps > 0) ||
      !(ram_expansion_factor > 0)) {
    throw Error(ErrorKind::kConfig, "system spec values must be positive");
  }
}

SystemSpec SystemSpec::Detect() {
  SystemSpec spec;
  spec.cores = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::ifstream in("/proc/meminfo");
  std::string key;
  double kib;
  while (in >> key >> kib) {
    if (key == "MemTotal:") {
      spec.ram_bytes = kib * 1024.0;
      break;
    }
    in.ignore(1 << 10, '\n');
  }
  return spec;
}

void ProfileAccumulator::Add(const Tick& t, double weight_ms) {
  ++ticks_;
  weight_ms_ += weight_ms;
  if (t.cpu) {
    cpu_sum_ += *t.cpu * weight_ms;
    cpu_w_ += weight_ms;
    cpu_peak_ = std::max(cpu_peak_, *t.cpu);
  }
  if (t.mem) {
    mem_sum_ += *t.mem * weight_ms;
    mem_w_ += weight_ms;
    mem_peak_ = std::max(mem_peak_, *t.mem);
  }
  if (t.io_wait) {
    wait_sum_ += *t.io_wait * weight_ms;
    wait_w_ += weight_ms;
  }
  if (t.rss) rss_peak_ = std::max(rss_peak_, *t.rss);
  if (t.read_Bps) read_bytes_ += *t.read_Bps * weight_ms / 1000.0;
  if (t.write_Bps) write_bytes_ += *t.write_Bps * weight_ms / 1000.0;
}

void ProfileAccumulator::Merge(const ProfileAccumulator& o) {
  ticks_ += o.ticks_;
  weight_ms_ += o.weight_ms_;
  cpu_sum_ += o.cpu_sum_;
  cpu_w_ += o.cpu_w_;
  cpu_peak_ = std::max(cpu_peak_, o.cpu_peak_);
  mem_sum_ += o.mem_sum_;
  mem_w_ += o.mem_w_;
  mem_peak_ = std::max(mem_peak_, o.mem_peak_);
  wait_sum_ += o.wait_sum_;
  wait_w_ += o.wait_w_;
  rss_peak_ = std::max(rss_peak_, o.rss_peak_);
  read_bytes_ += o.read_bytes_;
  write_bytes_ += o.write_bytes_;
}

ResourceProfile ProfileAccumulator::Finish(const std::string& task_id) const {
  ResourceProfile p;
  p.task_id = task_id;
  p.samples = ticks_;
  p.duration_ms = weight_ms_;
  p.mean_cpu_pct = cpu_w_ > 0 ? cpu_sum_ / cpu_w_ : 0;
  p.peak_cpu_pct = cpu_peak_;
  p.mean_mem_pct = mem_w_ > 0 ? mem_sum_ / mem_w_ : 0;
  p.peak_mem_pct = mem_peak_;
  p.peak_rss_bytes = rss_peak_;
  p.read_bytes = read_bytes_;
  p.write_bytes = write_bytes_;
  p.mean_io_wait_pct = wait_w_ > 0 ? wait_sum_ / wait_w_ : 0;
  // Rounding in the weighted sums must not break peak >= mean.
  p.mean_cpu_pct = std::min(p.mean_cpu_pct, p.peak_cpu_pct);
  p.mean_mem_pct = std::min(p.mean_mem_pct, p.peak_mem_pct);
  return p;
}

std::map<std::string, ProfileAccumulator> AccumulateProfiles(const std::vector<Sample>& samples,
                                                             double period_ms, ProfileScope scope,
                                                             const SystemSpec* cap) {
  auto clip = [&](std::optional<double> v, bool read) -> std::optional<double> {
    if (!v || cap == nullptr) return v;
    return std::min(*v, read ? cap->max_read_Bps : cap->max_write_Bps);
  };
  auto add = [](std::optional<double>& acc, const std::optional<double>& v) {
    if (v) acc = acc.value_or(0.0) + *v;
  };
  // One tick per (task, timestamp); PROC rows of a tick are summed.
  std::map<std::pair<std::string, std::int64_t>, ProfileAccumulator::Tick> ticks;
  for (const auto& s : samples) {
    if (s.is_gap()) continue;
    auto& t = ticks[{s.task_id, s.ts_ms}];
    if (s.scope == Scope::kTotal) {
      // Separate CPU and IO samplers may each contribute a TOTAL row.
      if (s.io_wait_pct) t.io_wait = s.io_wait_pct;
      if (scope == ProfileScope::kSystem) {
        if (s.cpu_pct) t.cpu = s.cpu_pct;
        if (s.mem_pct) t.mem = s.mem_pct;
        if (s.read_Bps) t.read_Bps = s.read_Bps;
        if (s.write_Bps) t.write_Bps = s.write_Bps;
      }
    } else {
      if (s.rss_bytes) t.rss = t.rss.value_or(0) + *s.rss_bytes;
      if (scope == ProfileScope::kProcess) {
        add(t.cpu, s.cpu_pct);
        add(t.mem, s.mem_pct);
        add(t.read_Bps, s.read_Bps);
        add(t.write_Bps, s.write_Bps);
      }
    }
  }
  std::map<std::string, ProfileAccumulator> out;
  for (auto& [key, t] : ticks) {
    t.read_Bps = clip(t.read_Bps, true);
    t.write_Bps = clip(t.write_Bps, false);
    out[key.first].Add(t, period_ms);
  }
  return out;
}

std::map<std::string, std::optional<ResourceProfile>> AggregateProfiles(
    const std::vector<Sample>& samples, const std::vector<WorkloadTask>& tasks, double period_ms,
    ProfileScope scope, const SystemSpec* cap) {
  auto acc = AccumulateProfiles(samples, period_ms, scope, cap);
  std::map<std::string, std::optional<ResourceProfile>> out;
  for (const auto& task : tasks) {
    auto it = acc.find(task.task_id);
    if (it == acc.end() || it->second.empty()) {
      out[task.task_id] = std::nullopt;
    } else {
      out[task.task_id] = it->second.Finish(task.task_id);
    }
  }
  return out;
}

Wet ComputeWet(const std::vector<TaskTiming>& timings) {
  Wet w;
  for (const auto& t : timings) {
    (t.is_load ? w.load_ms : w.query_ms) += t.duration_ms;
  }
  w.total_ms = w.load_ms + w.query_ms;
  return w;
}

IoAmplification ComputeIoAmplification(double total_read_bytes, double total_write_bytes,
                                       double raw_file_bytes) {
  if (!(raw_file_bytes > 0)) throw Error(ErrorKind::kDomain, "raw file size must be positive");
  return {total_read_bytes / raw_file_bytes, total_write_bytes / raw_file_bytes};
}

Bandwidth BandwidthUtilization(double rate_Bps, const SystemSpec& spec, IoDirection dir) {
  const double ceiling = dir == IoDirection::kRead ? spec.max_read_Bps : spec.max_write_Bps;
  const double pct = std::max(rate_Bps, 0.0) / ceiling * 100.0;
  if (pct > 100.0) return {100.0, true};
  return {pct, false};
}

double CachedDatasetBytes(double file_bytes, const SystemSpec& spec) {
  return file_bytes * spec.ram_expansion_factor;
}

double EffectiveRamPct(double process_rss_bytes, double cached_dataset_bytes,
                       const SystemSpec& spec) {
  return (process_rss_bytes + cached_dataset_bytes) / spec.ram_bytes * 100.0;
}

ColdHotDelta ComputeColdHotDelta(const ExecStats& cold, const ExecStats& hot) {
  return {cold.duration_ms - hot.duration_ms,
          static_cast<std::int64_t>(cold.bytes_read_from_disk) -
              static_cast<std::int64_t>(hot.bytes_read_from_disk)};
}

// ---- report -----------------------------------------------------------------

namespace {

using nlohmann::json;

json ProfileJson(const std::optional<ResourceProfile>& p) {
  if (!p) return nullptr;
  return json{{"samples", p->samples},
              {"duration_ms", p->duration_ms},
              {"mean_cpu_pct", p->mean_cpu_pct},
              {"peak_cpu_pct", p->peak_cpu_pct},
              {"mean_mem_pct", p->mean_mem_pct},
              {"peak_mem_pct", p->peak_mem_pct},
              {"peak_rss_bytes", p->peak_rss_bytes},
              {"read_bytes", p->read_bytes},
              {"write_bytes", p->write_bytes},
              {"mean_io_wait_pct", p->mean_io_wait_pct}};
}

json StatsJson(const ExecStats& s) {
  return json{{"duration_ms", s.duration_ms},
              {"bytes_read_from_disk", s.bytes_read_from_disk},
              {"bytes_written_to_disk", s.bytes_written_to_disk},
              {"rows_scanned", s.rows_scanned},
              {"cache_hit_columns", s.cache_hit_columns},
              {"early_stop", s.early_stop},
              {"peak_cache_bytes", s.peak_cache_bytes}};
}

using SeriesMap = std::map<std::string, std::vector<std::pair<std::int64_t, double>>>;

SeriesMap CollectSeries(const std::vector<Sample>& samples) {
  SeriesMap series;
  // PROC rows are summed per timestamp into the "proc.*" series.
  std::map<std::int64_t, std::map<std::string, double>> proc;
  auto put = [&](const char* name, std::int64_t ts, const std::optional<double>& v) {
    if (v) series[name].emplace_back(ts, *v);
  };
  for (const auto& s : samples) {
    if (s.is_gap()) continue;
    if (s.scope == Scope::kTotal) {
      put("total.cpu_pct", s.ts_ms, s.cpu_pct);
      put("total.mem_pct", s.ts_ms, s.mem_pct);
      put("total.read_Bps", s.ts_ms, s.read_Bps);
      put("total.write_Bps", s.ts_ms, s.write_Bps);
      put("total.io_wait_pct", s.ts_ms, s.io_wait_pct);
      continue;
    }
    auto& row = proc[s.ts_ms];
    if (s.cpu_pct) row["proc.cpu_pct"] += *s.cpu_pct;
    if (s.mem_pct) row["proc.mem_pct"] += *s.mem_pct;
    if (s.rss_bytes) row["proc.rss_bytes"] += static_cast<double>(*s.rss_bytes);
    if (s.read_Bps) row["proc.read_Bps"] += *s.read_Bps;
    if (s.write_Bps) row["proc.write_Bps"] += *s.write_Bps;
  }
  for (const auto& [ts, row] : proc) {
    for (const auto& [name, v] : row) series[name].emplace_back(ts, v);
  }
  for (auto& [name, pts] : series) {
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  return series;
}

// Bucket means; each bucket is stamped with its first timestamp.
std::vector<std::pair<std::int64_t, double>> Downsample(
    const std::vector<std::pair<std::int64_t, double>>& pts, std::size_t max_points) {
  if (max_points == 0 || pts.size() <= max_points) return pts;
  std::vector<std::pair<std::int64_t, double>> out;
  const std::size_t per = (pts.size() + max_points - 1) / max_points;
  for (std::size_t i = 0; i < pts.size(); i += per) {
    const std::size_t end = std::min(pts.size(), i + per);
    double sum = 0;
    for (std::size_t j = i; j < end; ++j) sum += pts[j].second;
    out.emplace_back(pts[i].first, sum / static_cast<double>(end - i));
  }
  return out;
}

}  // namespace

json BuildReport(const RunSummary& run, std::size_t max_series_points) {
  json report;
  report["engine"] = run.engine;
  report["spec"] = {{"cores", run.spec.cores},
                    {"ram_bytes", run.spec.ram_bytes},
                    {"max_read_Bps", run.spec.max_read_Bps},
                    {"max_write_Bps", run.spec.max_write_Bps},
                    {"ram_expansion_factor", run.spec.ram_expansion_factor}};

  std::vector<TaskTiming> timings;
  json tasks = json::array();
  std::uint64_t read = 0, written = 0;
  for (const auto& r : run.records) {
    json t{{"task_id", r.task_id},
           {"statement", r.statement},
           {"kind", r.is_load ? "load" : "query"},
           {"ok", r.ok},
           {"duration_ms", r.duration_ms},
           {"result_rows", r.result_rows},
           {"stats", StatsJson(r.stats)}};
    if (!r.engine.empty()) t["engine"] = r.engine;
    if (!r.ok) t["error"] = r.error;
    tasks.push_back(std::move(t));
    timings.push_back({r.task_id, r.is_load, r.duration_ms});
    read += r.stats.bytes_read_from_disk;
    written += r.stats.bytes_written_to_disk;
  }
  report["tasks"] = std::move(tasks);

  const Wet wet = ComputeWet(timings);
  report["wet"] = {{"total_ms", wet.total_ms}, {"load_ms", wet.load_ms},
                   {"query_ms", wet.query_ms}};

  json io{{"engine_read_bytes", read},
          {"engine_written_bytes", written},
          {"raw_file_bytes", run.raw_file_bytes}};
  if (run.raw_file_bytes > 0) {
    const auto amp = ComputeIoAmplification(static_cast<double>(read),
                                            static_cast<double>(written), run.raw_file_bytes);
    io["read_x"] = amp.read_x;
    io["write_x"] = amp.write_x;
    io["effective_ram_pct_if_cached"] =
        EffectiveRamPct(0, CachedDatasetBytes(run.raw_file_bytes, run.spec), run.spec);
  }
  io["peak_cache_bytes"] = run.peak_cache_bytes;
  report["io"] = std::move(io);

  json profiles;
  for (auto [name, scope] : {std::pair{"system", ProfileScope::kSystem},
                             std::pair{"process", ProfileScope::kProcess}}) {
    json by_task = json::object();
    for (const auto& [id, p] :
         AggregateProfiles(run.samples, run.tasks, run.period_ms, scope, &run.spec)) {
      by_task[id] = ProfileJson(p);
    }
    profiles[name] = std::move(by_task);
  }
  report["profiles"] = std::move(profiles);

  // Bandwidth utilization of the run-level peak rates.
  double peak_read = 0, peak_write = 0;
  for (const auto& s : run.samples) {
    if (s.scope != Scope::kTotal) continue;
    peak_read = std::max(peak_read, s.read_Bps.value_or(0));
    peak_write = std::max(peak_write, s.write_Bps.value_or(0));
  }
  const auto rb = BandwidthUtilization(peak_read, run.spec, IoDirection::kRead);
  const auto wb = BandwidthUtilization(peak_write, run.spec, IoDirection::kWrite);
  report["bandwidth"] = {{"peak_read_pct", rb.pct}, {"read_saturated", rb.saturated},
                         {"peak_write_pct", wb.pct}, {"write_saturated", wb.saturated}};

  report["monitor"] = {{"period_ms", run.period_ms},
                       {"total_samples", run.flush.total_samples},
                       {"written_samples", run.flush.written_samples},
                       {"flush_count", run.flush.flush_count},
                       {"threshold_flushes", run.flush.threshold_flushes},
                       {"final_flush_rows", run.flush.final_flush_rows},
                       {"dropped", run.flush.dropped},
                       {"gap_rows", run.flush.gap_rows},
                       {"max_buffered", run.flush.max_buffered}};

  json series = json::object();
  for (const auto& [name, pts] : CollectSeries(run.samples)) {
    json arr = json::array();
    for (const auto& [ts, v] : Downsample(pts, max_series_points)) arr.push_back({ts, v});
    series[name] = std::move(arr);
  }
  report["series"] = std::move(series);
  return report;
}

void WriteSeriesCsv(const std::string& path, const std::vector<Sample>& samples) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (f == nullptr) throw Error(ErrorKind::kIo, "cannot write " + path);
  std::string out = "ts_ms,series,value\n";
  std::vector<std::tuple<std::int64_t, std::string, double>> rows;
  for (const auto& [name, pts] : CollectSeries(samples)) {
    for (const auto& [ts, v] : pts) rows.emplace_back(ts, name, v);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::get<0>(a) < std::get<0>(b);
  });
  for (const auto& [ts, name, v] : rows) {
    out += std::to_string(ts);
    out += ',';
    out += name;
    out += ',';
    out += FormatNumber(v);
    out += '\n';
  }
  const bool ok = std::fwrite(out.data(), 1, out.size(), f) == out.size();
  if (std::fclose(f) != 0 || !ok) throw Error(ErrorKind::kIo, "cannot write " + path);
}

}  // namespace insitu
