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

// insitu: workload runner, data generator and partition advisor.
//
// Exit codes: 0 ok, 1 unexpected failure, 2 configuration or usage error,
// 3 workload/query parse error, 4 engine error, 5 monitor or stat-source
// error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "insitu/advisor.h"
#include "insitu/analyzer.h"
#include "insitu/csv.h"
#include "insitu/error.h"
#include "insitu/gen_data.h"
#include "insitu/monitor.h"
#include "insitu/query_model.h"
#include "insitu/runner.h"
#include "insitu/stat_sources.h"

namespace {

using namespace insitu;
using nlohmann::json;

std::map<std::string, std::string> ParseTableBindings(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      throw Error(ErrorKind::kConfig, "--table expects name=path, got '" + s + "'");
    }
    std::string name = s.substr(0, eq);
    for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out[name] = s.substr(eq + 1);
  }
  return out;
}

// Qualified schema from the headers of the bound CSV files.
std::vector<std::string> SchemaOf(const std::map<std::string, std::string>& tables) {
  std::vector<std::string> schema;
  for (const auto& [table, path] : tables) {
    LineReader reader(path);
    std::string_view line;
    std::uint64_t begin;
    if (!reader.Next(line, begin)) throw FormatError(1, path + ": missing header row");
    for (const auto& a : ParseHeader(line)) schema.push_back(table + "." + a);
  }
  return schema;
}

std::map<std::string, QueryClass> ClassesOf(const std::vector<WorkloadTask>& tasks) {
  std::map<std::string, QueryClass> out;
  for (const auto& t : tasks) {
    QueryAst ast = ParseQuery(t.statement);
    if (!ast.is_load()) out[t.task_id] = Classify(ast);
  }
  return out;
}

void WriteJson(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
}

std::optional<ResourceProfile> ProfileFromJson(const json& j) {
  if (j.is_null()) return std::nullopt;
  ResourceProfile p;
  p.samples = j.value("samples", 0ULL);
  p.duration_ms = j.value("duration_ms", 0.0);
  p.mean_cpu_pct = j.value("mean_cpu_pct", 0.0);
  p.peak_cpu_pct = j.value("peak_cpu_pct", 0.0);
  p.mean_mem_pct = j.value("mean_mem_pct", 0.0);
  p.peak_mem_pct = j.value("peak_mem_pct", 0.0);
  p.peak_rss_bytes = j.value("peak_rss_bytes", 0ULL);
  p.read_bytes = j.value("read_bytes", 0.0);
  p.write_bytes = j.value("write_bytes", 0.0);
  p.mean_io_wait_pct = j.value("mean_io_wait_pct", 0.0);
  return p;
}

int Main(int argc, char** argv) {
  CLI::App app{"In-situ vs. load-then-query workbench with per-task resource monitoring"};
  app.require_subcommand(1);

  // run
  RunConfig rc;
  std::string journal = "on";
  std::vector<std::string> run_tables;
  std::vector<std::string> watch;
  auto* run = app.add_subcommand("run", "Execute a workload under the resource monitor");
  run->add_option("--workload", rc.workload_path, "Workload CSV (T_ID,Statement)")->required();
  run->add_option("--engine", rc.engine, "raw | db | plan:<file>")->capture_default_str();
  run->add_option("--freq", rc.monitor.frequency_hz, "Monitor samples per second")
      ->capture_default_str();
  run->add_option("--flush-threshold", rc.monitor.flush_threshold_records,
                  "Buffered samples that trigger a write")
      ->capture_default_str();
  run->add_option("--cache-budget", rc.cache_budget, "Column cache budget in bytes")
      ->capture_default_str();
  run->add_option("--journal", journal, "on | off")->check(CLI::IsMember({"on", "off"}));
  run->add_option("--source", rc.source, "procfs | synthetic | replay:<file>")
      ->capture_default_str();
  run->add_option("--out", rc.out_dir, "Output directory")->required();
  run->add_option("--seed", rc.seed, "Seed for the synthetic source")->capture_default_str();
  run->add_flag("--parallel-load", rc.parallel_load,
                "Plan engine: load db columns in the background");
  run->add_option("--table", run_tables, "Pre-bind a table: name=path.csv");
  run->add_option("--data-dir", rc.data_dir, "Db table directory (default $INSITU_DATA_DIR)");
  run->add_option("--watch", watch, "Process names to sample (default: insitu)");
  run->add_option("--virtual-ticks", rc.virtual_ticks_per_task,
                  "Synthetic/replay ticks granted per task")
      ->capture_default_str();
  run->add_option("--join-guard", rc.join_guard, "Largest nested-loop pair count")
      ->capture_default_str();
  run->add_flag("--results", rc.write_results, "Write each query result to results/<id>.csv");
  run->add_option("--ram-bytes", rc.spec.ram_bytes, "RAM size used for percentages");
  run->add_option("--max-read-bps", rc.spec.max_read_Bps, "Read bandwidth ceiling");
  run->add_option("--max-write-bps", rc.spec.max_write_Bps, "Write bandwidth ceiling");
  run->add_option("--ram-expansion", rc.spec.ram_expansion_factor,
                  "Cached bytes per raw byte");

  // gen-data
  GenDataOptions gd;
  std::string gd_out;
  auto* gen = app.add_subcommand("gen-data", "Write a seeded synthetic CSV");
  gen->add_option("--rows", gd.rows)->capture_default_str();
  gen->add_option("--columns", gd.columns)->capture_default_str();
  gen->add_option("--seed", gd.seed)->capture_default_str();
  gen->add_option("--skew", gd.skew, "Bend uniform columns toward their minimum")
      ->capture_default_str();
  gen->add_option("--out", gd_out, "CSV path")->required();

  // classify
  std::string cls_workload;
  auto* classify = app.add_subcommand("classify", "Print the class of every workload query");
  classify->add_option("--workload", cls_workload)->required();

  // advise
  std::string adv_workload, adv_out = "-", adv_report;
  std::vector<std::string> adv_tables;
  RuaThresholds thresholds;
  auto* advise = app.add_subcommand("advise", "Compute a partition plan");
  advise->require_subcommand(1);
  auto* qca = advise->add_subcommand("qca", "Partition by query class");
  auto* rua = advise->add_subcommand("rua", "Partition by measured resource use");
  for (auto* sub : {qca, rua}) {
    sub->add_option("--workload", adv_workload)->required();
    sub->add_option("--table", adv_tables, "Table schema source: name=path.csv")->required();
    sub->add_option("--out", adv_out, "Plan JSON path (default stdout)");
  }
  rua->add_option("--report", adv_report, "report.json of a raw run of the workload")
      ->required();
  rua->add_option("--read-threshold", thresholds.read_bytes, "Bytes")->capture_default_str();
  rua->add_option("--mem-threshold", thresholds.mem_pct, "Percent")->capture_default_str();

  // report
  std::string rep_samples, rep_workload, rep_out = "-";
  double rep_freq = 1.0;
  auto* report = app.add_subcommand("report", "Rebuild profiles from a samples.csv");
  report->add_option("--samples", rep_samples)->required();
  report->add_option("--workload", rep_workload)->required();
  report->add_option("--freq", rep_freq, "Sampling frequency of the capture")
      ->capture_default_str();
  report->add_option("--out", rep_out, "JSON path (default stdout)");

  // replay
  std::string rp_input, rp_out, rp_task = "REPLAY";
  double rp_freq = 1.0;
  std::vector<std::string> rp_watch;
  auto* replay = app.add_subcommand("replay", "Turn captured top/iotop output into samples");
  replay->add_option("--input", rp_input)->required();
  replay->add_option("--out", rp_out, "samples.csv path")->required();
  replay->add_option("--freq", rp_freq)->capture_default_str();
  replay->add_option("--watch", rp_watch, "Process names to keep")->required();
  replay->add_option("--task", rp_task, "Task id for every sample")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*run) {
    rc.journal = journal == "on" ? JournalMode::kOn : JournalMode::kOff;
    rc.tables = ParseTableBindings(run_tables);
    if (!watch.empty()) rc.monitor.watched_process_names = watch;
    RunReport r = Run(rc);
    std::printf("tasks %zu  wet %.3f ms (load %.3f, query %.3f)  samples %llu\n",
                r.records.size(), r.wet.total_ms, r.wet.load_ms, r.wet.query_ms,
                static_cast<unsigned long long>(r.flush.total_samples));
    if (r.aborted) {
      std::fprintf(stderr, "insitu: run aborted: %s\n", r.error.c_str());
      return ExitCodeFor(*r.error_kind);
    }
    return kExitOk;
  }
  if (*gen) {
    const auto bytes = GenerateCsv(gd, gd_out);
    std::printf("%s: %llu rows, %u columns, %llu bytes\n", gd_out.c_str(),
                static_cast<unsigned long long>(gd.rows), gd.columns,
                static_cast<unsigned long long>(bytes));
    return kExitOk;
  }
  if (*classify) {
    json out = json::array();
    for (const auto& t : ReadWorkloadFile(cls_workload)) {
      QueryAst ast = ParseQuery(t.statement);
      json row{{"task_id", t.task_id}};
      if (ast.is_load()) {
        row["kind"] = "load";
      } else {
        QueryClass c = Classify(ast);
        row["kind"] = QueryKindName(c.kind);
        row["join_count"] = c.join_count;
        row["is_sampling"] = c.is_sampling;
        row["attrs"] = c.attrs;
      }
      out.push_back(std::move(row));
    }
    std::cout << out.dump(2) << '\n';
    return kExitOk;
  }
  if (*advise) {
    const auto classes = ClassesOf(ReadWorkloadFile(adv_workload));
    const auto schema = SchemaOf(ParseTableBindings(adv_tables));
    PartitionPlan plan;
    if (*qca) {
      plan = QcaPartition(classes, schema);
    } else {
      std::ifstream in(adv_report, std::ios::binary);
      if (!in) throw Error(ErrorKind::kConfig, "cannot read " + adv_report);
      json rep;
      try {
        rep = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::kConfig, adv_report + " is not JSON: " + e.what());
      }
      std::map<std::string, std::optional<ResourceProfile>> profiles;
      if (rep.contains("profiles") && rep["profiles"].contains("process")) {
        for (const auto& [id, p] : rep["profiles"]["process"].items()) {
          profiles[id] = ProfileFromJson(p);
        }
      }
      plan = RuaPartition(classes, profiles, schema, thresholds);
    }
    if (adv_out == "-") std::cout << PlanToJson(plan).dump(2) << '\n';
    else WritePlanFile(plan, adv_out);
    return kExitOk;
  }
  if (*report) {
    RunSummary s;
    s.engine = "capture";
    s.tasks = ReadWorkloadFile(rep_workload);
    s.samples = ReadSamplesCsv(rep_samples);
    if (!(rep_freq > 0)) throw Error(ErrorKind::kConfig, "--freq must be positive");
    s.period_ms = 1000.0 / rep_freq;
    WriteJson(BuildReport(s), rep_out);
    return kExitOk;
  }
  if (*replay) {
    MonitorConfig mc;
    mc.frequency_hz = rp_freq;
    mc.watched_process_names = rp_watch;
    mc.output_path = rp_out;
    mc.virtual_clock = true;
    mc.Validate();
    auto src = std::make_unique<ReplaySource>(ReplaySource::FromFile(rp_input, 1.0 / rp_freq));
    const std::size_t ticks = src->tick_count();
    TaskRegister reg;
    reg.Set(rp_task);
    std::vector<std::unique_ptr<StatSource>> sources;
    sources.push_back(std::move(src));
    auto h = StartMonitor(mc, std::move(sources), reg);
    h->Advance(ticks);
    FlushReport fr = h->Stop();
    std::printf("%s: %llu ticks, %llu samples\n", rp_out.c_str(),
                static_cast<unsigned long long>(ticks),
                static_cast<unsigned long long>(fr.total_samples));
    return kExitOk;
  }
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Main(argc, argv);
  } catch (const insitu::Error& e) {
    std::fprintf(stderr, "insitu: %s error: %s\n", insitu::ErrorKindName(e.kind()), e.what());
    return insitu::ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "insitu: %s\n", e.what());
    return insitu::kExitOther;
  }
}
