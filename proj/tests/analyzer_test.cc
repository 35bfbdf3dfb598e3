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

#include <gtest/gtest.h>

#include <random>

#include "insitu/analyzer.h"
#include "insitu/error.h"
#include "test_util.h"

namespace insitu {
namespace {

Sample Total(std::int64_t ts, const std::string& task, double cpu, double read = 0) {
  Sample s;
  s.ts_ms = ts;
  s.task_id = task;
  s.cpu_pct = cpu;
  s.mem_pct = cpu / 10;
  s.read_Bps = read;
  s.write_Bps = 0.0;
  s.io_wait_pct = 1.0;
  return s;
}

Sample Proc(std::int64_t ts, const std::string& task, const std::string& name, double cpu,
            double read, std::uint64_t rss) {
  Sample s;
  s.ts_ms = ts;
  s.task_id = task;
  s.scope = Scope::kProcess;
  s.process = name;
  s.cpu_pct = cpu;
  s.mem_pct = 0.5;
  s.read_Bps = read;
  s.rss_bytes = rss;
  return s;
}

std::vector<WorkloadTask> Tasks(std::initializer_list<const char*> ids) {
  std::vector<WorkloadTask> out;
  for (const char* id : ids) out.push_back({id, "SELECT 1"});
  return out;
}

TEST(Profiles, MeanAndPeak) {
  auto p = AggregateProfiles({Total(0, "T", 10), Total(1000, "T", 30)}, Tasks({"T"}), 1000,
                             ProfileScope::kSystem);
  ASSERT_TRUE(p.at("T").has_value());
  EXPECT_DOUBLE_EQ(p.at("T")->mean_cpu_pct, 20);
  EXPECT_DOUBLE_EQ(p.at("T")->peak_cpu_pct, 30);
  EXPECT_EQ(p.at("T")->samples, 2u);
  EXPECT_DOUBLE_EQ(p.at("T")->duration_ms, 2000);
}

TEST(Profiles, EmptyTaskGetsMarker) {
  auto p = AggregateProfiles({Total(0, "Q0", 10)}, Tasks({"TRUN", "Q0"}), 1000,
                             ProfileScope::kSystem);
  EXPECT_FALSE(p.at("TRUN").has_value());
  EXPECT_TRUE(p.at("Q0").has_value());
}

TEST(Profiles, TinyReadStaysUnderTwoMegabytes) {
  std::vector<Sample> s = {Total(0, "Q7", 5, 1.5e6), Total(1000, "Q8", 50, 200e6)};
  auto p = AggregateProfiles(s, Tasks({"Q7", "Q8"}), 1000, ProfileScope::kSystem);
  EXPECT_LT(p.at("Q7")->read_bytes, 2e6);
  EXPECT_DOUBLE_EQ(p.at("Q7")->read_bytes, 1.5e6);
}

TEST(Profiles, RatesCappedBySpec) {
  SystemSpec spec;
  auto p = AggregateProfiles({Total(0, "T", 5, 900e6)}, Tasks({"T"}), 1000,
                             ProfileScope::kSystem, &spec);
  EXPECT_DOUBLE_EQ(p.at("T")->read_bytes, 300e6);
}

TEST(Profiles, ProcessScopeSumsRowsOfATick) {
  std::vector<Sample> s = {Total(0, "T", 50), Proc(0, "T", "a", 40, 10, 100),
                           Proc(0, "T", "b", 30, 5, 50), Total(1000, "T", 50),
                           Proc(1000, "T", "a", 20, 10, 300)};
  auto p = AggregateProfiles(s, Tasks({"T"}), 1000, ProfileScope::kProcess);
  EXPECT_DOUBLE_EQ(p.at("T")->peak_cpu_pct, 70);
  EXPECT_DOUBLE_EQ(p.at("T")->mean_cpu_pct, 45);
  EXPECT_DOUBLE_EQ(p.at("T")->read_bytes, 25);
  EXPECT_EQ(p.at("T")->peak_rss_bytes, 300u);
  EXPECT_DOUBLE_EQ(p.at("T")->mean_io_wait_pct, 1.0);
}

TEST(Profiles, GapRowsIgnored) {
  Sample gap;
  gap.ts_ms = 1000;
  gap.task_id = "T";
  gap.process = Sample::kGapMarker;
  auto p = AggregateProfiles({Total(0, "T", 10), gap}, Tasks({"T"}), 1000,
                             ProfileScope::kSystem);
  EXPECT_EQ(p.at("T")->samples, 1u);
}

std::vector<Sample> RandomSamples(std::uint64_t seed, std::int64_t ticks) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 100);
  const char* tasks[] = {"A", "B", "C"};
  std::vector<Sample> out;
  for (std::int64_t t = 0; t < ticks; ++t) {
    const std::string task = tasks[(t / 7) % 3];
    out.push_back(Total(t * 100, task, u(rng), u(rng) * 1e6));
    out.push_back(Proc(t * 100, task, "insitu", u(rng), u(rng) * 1e5,
                       static_cast<std::uint64_t>(u(rng) * 1e6)));
  }
  return out;
}

TEST(Profiles, ConcatenationEqualsMerge) {
  auto all = RandomSamples(4, 200);
  for (ProfileScope scope : {ProfileScope::kSystem, ProfileScope::kProcess}) {
    for (std::size_t cut : {0u, 2u, 150u, 400u}) {
      std::vector<Sample> a(all.begin(), all.begin() + cut), b(all.begin() + cut, all.end());
      auto whole = AccumulateProfiles(all, 100, scope);
      auto left = AccumulateProfiles(a, 100, scope);
      for (const auto& [id, acc] : AccumulateProfiles(b, 100, scope)) left[id].Merge(acc);
      ASSERT_EQ(whole.size(), left.size());
      for (const auto& [id, acc] : whole) {
        ResourceProfile x = acc.Finish(id), y = left[id].Finish(id);
        EXPECT_EQ(x.samples, y.samples);
        EXPECT_NEAR(x.mean_cpu_pct, y.mean_cpu_pct, 1e-9);
        EXPECT_DOUBLE_EQ(x.peak_cpu_pct, y.peak_cpu_pct);
        EXPECT_NEAR(x.read_bytes, y.read_bytes, 1e-6 * x.read_bytes);
        EXPECT_EQ(x.peak_rss_bytes, y.peak_rss_bytes);
      }
    }
  }
}

TEST(Profiles, ConservationAndPeaks) {
  auto all = RandomSamples(9, 300);
  for (ProfileScope scope : {ProfileScope::kSystem, ProfileScope::kProcess}) {
    auto p = AggregateProfiles(all, Tasks({"A", "B", "C"}), 100, scope);
    double per_task = 0;
    for (const auto& [id, prof] : p) {
      ASSERT_TRUE(prof.has_value());
      per_task += prof->read_bytes;
      EXPECT_GE(prof->peak_cpu_pct, prof->mean_cpu_pct);
      EXPECT_GE(prof->peak_mem_pct, prof->mean_mem_pct);
    }
    double run_total = 0;
    for (const auto& s : all) {
      if (s.scope == (scope == ProfileScope::kSystem ? Scope::kTotal : Scope::kProcess)) {
        run_total += *s.read_Bps * 0.1;
      }
    }
    EXPECT_LE(per_task, run_total * (1 + 1e-12));
  }
}

TEST(Wet, Splits) {
  Wet w = ComputeWet({{"COPY", true, 100}, {"Q0", false, 5}});
  EXPECT_DOUBLE_EQ(w.total_ms, 105);
  EXPECT_DOUBLE_EQ(w.load_ms, 100);
  EXPECT_DOUBLE_EQ(w.query_ms, 5);
  Wet raw = ComputeWet({{"COPY", true, 0}, {"Q0", false, 50}});
  EXPECT_DOUBLE_EQ(raw.load_ms, 0);
}

TEST(IoAmplification, Ratios) {
  auto a = ComputeIoAmplification(10.34e9, 0, 4.7e9);
  EXPECT_NEAR(a.read_x, 2.2, 1e-9);
  EXPECT_DOUBLE_EQ(a.write_x, 0);
  EXPECT_DOUBLE_EQ(ComputeIoAmplification(5, 0, 5).read_x, 1.0);
  auto b = ComputeIoAmplification(2 * 10.34e9, 2 * 1e9, 2 * 4.7e9);
  EXPECT_NEAR(b.read_x, a.read_x, 1e-12);
  EXPECT_NEAR(b.write_x, 1e9 / 4.7e9, 1e-12);
  EXPECT_THROW(ComputeIoAmplification(1, 1, 0), Error);
}

TEST(Bandwidth, CeilingsAndSaturation) {
  SystemSpec spec;
  EXPECT_DOUBLE_EQ(BandwidthUtilization(150e6, spec, IoDirection::kRead).pct, 50);
  EXPECT_FALSE(BandwidthUtilization(150e6, spec, IoDirection::kRead).saturated);
  EXPECT_DOUBLE_EQ(BandwidthUtilization(0, spec, IoDirection::kWrite).pct, 0);
  Bandwidth sat = BandwidthUtilization(400e6, spec, IoDirection::kRead);
  EXPECT_DOUBLE_EQ(sat.pct, 100);
  EXPECT_TRUE(sat.saturated);
  EXPECT_DOUBLE_EQ(BandwidthUtilization(100e6, spec, IoDirection::kWrite).pct, 50);
}

TEST(EffectiveRam, Examples) {
  SystemSpec spec;
  EXPECT_NEAR(EffectiveRamPct(0.002 * 16e9, 0, spec), 0.2, 1e-9);
  EXPECT_NEAR(EffectiveRamPct(0, CachedDatasetBytes(4.6e9, spec), spec), 64.4, 1e-9);
  EXPECT_NEAR(EffectiveRamPct(0, spec.ram_bytes, spec), 100, 1e-12);
  SystemSpec big = spec;
  big.ram_bytes *= 2;
  EXPECT_NEAR(EffectiveRamPct(2e9, 2 * 3e9, big), EffectiveRamPct(1e9, 3e9, spec), 1e-12);
}

TEST(SystemSpec, Validation) {
  SystemSpec spec;
  EXPECT_NO_THROW(spec.Validate());
  spec.max_read_Bps = 0;
  EXPECT_THROW(spec.Validate(), Error);
  EXPECT_GT(SystemSpec::Detect().ram_bytes, 0);
}

TEST(ColdHot, Deltas) {
  ExecStats cold, hot;
  EXPECT_DOUBLE_EQ(ComputeColdHotDelta(cold, hot).time_delta_ms, 0);
  EXPECT_EQ(ComputeColdHotDelta(cold, hot).bytes_delta, 0);
  cold.duration_ms = 120;
  cold.bytes_read_from_disk = 104857600;
  hot.duration_ms = 20;
  auto d = ComputeColdHotDelta(cold, hot);
  EXPECT_DOUBLE_EQ(d.time_delta_ms, 100);
  EXPECT_EQ(d.bytes_delta, 104857600);
}

TEST(Report, KeysAndSeries) {
  RunSummary run;
  run.engine = "raw";
  run.tasks = Tasks({"COPY", "Q0"});
  TaskRecord copy{"COPY", "COPY t FROM 'x'", true, true, "", 0, 0, "", {}};
  TaskRecord q{"Q0", "SELECT 1", false, true, "", 12, 1, "", {}};
  q.stats.bytes_read_from_disk = 1000;
  run.records = {copy, q};
  run.samples = RandomSamples(1, 1200);
  run.period_ms = 100;
  run.raw_file_bytes = 500;
  nlohmann::json r = BuildReport(run, 100);
  for (const char* key : {"engine", "spec", "tasks", "wet", "io", "profiles", "bandwidth",
                          "monitor", "series"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_DOUBLE_EQ(r["wet"]["load_ms"].get<double>(), 0);
  EXPECT_DOUBLE_EQ(r["io"]["read_x"].get<double>(), 2.0);
  EXPECT_TRUE(r["profiles"]["system"]["COPY"].is_null());
  EXPECT_LE(r["series"]["total.cpu_pct"].size(), 100u);
  EXPECT_GE(r["series"]["total.cpu_pct"].size(), 50u);

  testing::TempDir dir;
  WriteSeriesCsv(dir.Path("series.csv"), run.samples);
  std::string text = testing::ReadFile(dir.Path("series.csv"));
  EXPECT_EQ(text.rfind("ts_ms,series,value\n", 0), 0u);
  EXPECT_NE(text.find(",proc.rss_bytes,"), std::string::npos);
}

}  // namespace
}  // namespace insitu
