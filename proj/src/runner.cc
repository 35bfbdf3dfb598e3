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

#include "insitu/runner.h"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <thread>

#include "insitu/advisor.h"
#include "insitu/column_cache.h"
#include "insitu/csv.h"
#include "insitu/query_model.h"
#include "insitu/raw_engine.h"
#include "insitu/stat_sources.h"

namespace insitu {
namespace fs = std::filesystem;

namespace {

bool IsPlanEngine(const std::string& engine) { return engine.rfind("plan:", 0) == 0; }

double ElapsedMs(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string ResolvePath(const std::string& path, const fs::path& base) {
  fs::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (base / p).string();
}

struct ParsedTask {
  WorkloadTask task;
  QueryAst ast;
};

}  // namespace

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitConfig;
    case ErrorKind::kFormat:
    case ErrorKind::kParse:
    case ErrorKind::kDomain: return kExitParse;
    case ErrorKind::kSchema:
    case ErrorKind::kIo:
    case ErrorKind::kBudgetExceeded:
    case ErrorKind::kJoinGuard:
    case ErrorKind::kNotLoaded:
    case ErrorKind::kUnknownTable:
    case ErrorKind::kAlreadyLoaded:
    case ErrorKind::kUncoveredQuery: return kExitEngine;
    case ErrorKind::kSourceUnavailable:
    case ErrorKind::kMonitor: return kExitMonitor;
  }
  return kExitOther;
}

void RunConfig::Validate() const {
  if (workload_path.empty()) throw Error(ErrorKind::kConfig, "no workload file given");
  if (out_dir.empty()) throw Error(ErrorKind::kConfig, "no output directory given");
  if (engine != "raw" && engine != "db" && !IsPlanEngine(engine)) {
    throw Error(ErrorKind::kConfig, "engine must be raw, db or plan:<file>");
  }
  if (IsPlanEngine(engine) && engine.size() == 5) {
    throw Error(ErrorKind::kConfig, "plan engine needs a plan file");
  }
  if (source != "procfs" && source != "synthetic" && source.rfind("replay:", 0) != 0) {
    throw Error(ErrorKind::kConfig, "source must be procfs, synthetic or replay:<file>");
  }
  if (cache_budget == 0) throw Error(ErrorKind::kConfig, "cache budget must be positive");
  if (parallel_load && !IsPlanEngine(engine)) {
    throw Error(ErrorKind::kConfig, "--parallel-load needs a plan engine");
  }
  MonitorConfig m = monitor;
  if (m.output_path.empty()) m.output_path = "-";
  m.Validate();
  spec.Validate();
}

RunReport Run(const RunConfig& config) {
  config.Validate();
  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec || !fs::is_directory(config.out_dir)) {
    throw Error(ErrorKind::kConfig, "cannot create output directory " + config.out_dir);
  }
  const fs::path out_dir(config.out_dir);

  // Everything is parsed before the monitor starts.
  const auto tasks = ReadWorkloadFile(config.workload_path);
  const fs::path workload_dir = fs::path(config.workload_path).parent_path();
  std::vector<ParsedTask> parsed;
  for (const auto& t : tasks) parsed.push_back({t, ParseQuery(t.statement)});

  std::optional<PartitionPlan> plan;
  if (IsPlanEngine(config.engine)) plan = ReadPlanFile(config.engine.substr(5));

  ColumnCache raw_cache(config.cache_budget);
  ColumnCache db_cache(config.cache_budget);
  RawEngineOptions raw_opts;
  raw_opts.join_guard = config.join_guard;
  RawEngine raw(raw_cache, raw_opts);
  std::string data_dir = config.data_dir;
  if (data_dir.empty()) {
    const char* env = std::getenv("INSITU_DATA_DIR");
    data_dir = env != nullptr && *env ? env : (out_dir / "db").string();
  }
  fs::create_directories(data_dir, ec);
  DbEngine db(data_dir, db_cache);

  std::set<std::string> input_files;
  for (const auto& [table, path] : config.tables) {
    raw.BindTable(table, path);
    input_files.insert(fs::absolute(path).string());
  }

  MonitorConfig mcfg = config.monitor;
  mcfg.output_path = (out_dir / "samples.csv").string();
  std::vector<std::unique_ptr<StatSource>> sources;
  if (config.source == "procfs") {
    ProcfsOptions po;
    po.watched = mcfg.watched_process_names;
    sources.push_back(std::make_unique<ProcfsSource>(po));
    mcfg.virtual_clock = false;
  } else if (config.source == "synthetic") {
    const std::size_t ticks = (tasks.size() + 1) * config.virtual_ticks_per_task;
    sources.push_back(std::make_unique<SyntheticSource>(
        SyntheticSource::Generate(config.seed, ticks, mcfg.watched_process_names)));
    mcfg.virtual_clock = true;
  } else {
    sources.push_back(std::make_unique<ReplaySource>(
        ReplaySource::FromFile(config.source.substr(7), 1.0 / mcfg.frequency_hz)));
    mcfg.virtual_clock = true;
  }

  if (config.write_results) fs::create_directories(out_dir / "results", ec);

  TaskRegister reg;
  auto monitor = StartMonitor(mcfg, std::move(sources), reg);
  RunReport run;
  std::future<LoadStats> background;
  std::string background_task;
  auto join_background = [&] {
    if (!background.valid()) return;
    TaskRecord rec;
    rec.task_id = background_task + "@load";
    rec.statement = "background load";
    rec.is_load = true;
    rec.engine = "db";
    LoadStats ls = background.get();
    rec.duration_ms = ls.duration_ms;
    rec.stats.duration_ms = ls.duration_ms;
    rec.stats.bytes_read_from_disk = ls.input_bytes;
    rec.stats.bytes_written_to_disk = ls.total_written();
    rec.result_rows = ls.rows_loaded;
    run.records.push_back(std::move(rec));
  };

  for (const auto& [task, ast] : parsed) {
    reg.Set(task.task_id);
    if (mcfg.virtual_clock) monitor->Advance(config.virtual_ticks_per_task);
    TaskRecord rec;
    rec.task_id = task.task_id;
    rec.statement = task.statement;
    rec.is_load = ast.is_load();
    try {
      if (ast.kind == StatementKind::kCopy) {
        const std::string table = ast.tables.at(0);
        const std::string path = ResolvePath(ast.copy_path, workload_dir);
        input_files.insert(fs::absolute(path).string());
        if (config.engine == "raw") {
          // Binding is the whole load.
          raw.BindTable(table, path);
          rec.engine = "raw";
        } else if (config.engine == "db") {
          LoadStats ls = db.LoadTable(path, table, config.journal);
          rec.duration_ms = ls.duration_ms;
          rec.stats.duration_ms = ls.duration_ms;
          rec.stats.bytes_read_from_disk = ls.input_bytes;
          rec.stats.bytes_written_to_disk = ls.total_written();
          rec.result_rows = ls.rows_loaded;
          rec.engine = "db";
        } else if (config.parallel_load) {
          const auto start = std::chrono::steady_clock::now();
          PartitionPlan raw_only = *plan;
          raw_only.db_attrs.clear();
          const std::string slice = (out_dir / ("slice_" + table + ".csv")).string();
          MaterializeResult m =
              MaterializePlan(raw_only, table, path, slice, db, config.journal);
          if (!m.slice_path.empty()) raw.BindTable(table, m.slice_path);
          const auto db_cols = plan->DbColumnsOf(table);
          if (!db_cols.empty()) {
            join_background();
            background_task = task.task_id;
            background = std::async(std::launch::async, [&db, path, table, db_cols,
                                                         journal = config.journal] {
              return db.LoadTable(path, table, journal, &db_cols);
            });
          }
          rec.duration_ms = ElapsedMs(start);
          rec.stats.duration_ms = rec.duration_ms;
          rec.stats.bytes_read_from_disk = m.input_bytes;
          rec.stats.bytes_written_to_disk = m.slice_bytes;
          rec.engine = "plan";
        } else {
          const std::string slice = (out_dir / ("slice_" + table + ".csv")).string();
          MaterializeResult m = MaterializePlan(*plan, table, path, slice, db, config.journal);
          if (!m.slice_path.empty()) raw.BindTable(table, m.slice_path);
          rec.duration_ms = m.duration_ms;
          rec.stats.duration_ms = m.duration_ms;
          rec.stats.bytes_read_from_disk = m.input_bytes;
          rec.stats.bytes_written_to_disk = m.slice_bytes + m.load.total_written();
          rec.result_rows = m.load.rows_loaded;
          rec.engine = "plan";
        }
      } else if (ast.kind == StatementKind::kTruncate) {
        const std::string& table = ast.tables.at(0);
        join_background();
        // Truncating a table that was never loaded is a no-op.
        if (config.engine != "raw" && db.HasTable(table)) {
          rec.duration_ms = db.TruncateTable(table);
          rec.stats.duration_ms = rec.duration_ms;
        }
        rec.engine = config.engine == "raw" ? "raw" : "db";
      } else {
        EngineChoice choice = config.engine == "raw" ? EngineChoice::kRaw : EngineChoice::kDb;
        if (plan) choice = RouteQuery(task.task_id, Classify(ast), *plan);
        if (choice == EngineChoice::kDb) join_background();
        ExecResult r = choice == EngineChoice::kRaw ? raw.Execute(ast) : db.Execute(ast);
        rec.engine = EngineChoiceName(choice);
        rec.stats = r.stats;
        rec.duration_ms = r.stats.duration_ms;
        rec.result_rows = r.result.rows.size();
        if (config.write_results) {
          std::ofstream out(out_dir / "results" / (task.task_id + ".csv"), std::ios::binary);
          r.result.WriteCsv(out);
        }
      }
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.what();
      run.records.push_back(std::move(rec));
      run.aborted = true;
      run.error_kind = e.kind();
      run.error = e.what();
      break;
    }
    run.records.push_back(std::move(rec));
  }
  try {
    join_background();
  } catch (const Error& e) {
    if (!run.aborted) {
      run.aborted = true;
      run.error_kind = e.kind();
      run.error = e.what();
    }
  }
  reg.Set(TaskRegister::kIdle);
  run.flush = monitor->Stop();

  RunSummary summary;
  summary.engine = config.engine;
  summary.tasks = tasks;
  summary.records = run.records;
  summary.samples = ReadSamplesCsv(mcfg.output_path);
  summary.period_ms = 1000.0 / mcfg.frequency_hz;
  summary.spec = config.spec;
  for (const auto& f : input_files) summary.raw_file_bytes += static_cast<double>(FileSize(f));
  summary.flush = run.flush;
  summary.peak_cache_bytes = std::max(raw_cache.peak_bytes(), db_cache.peak_bytes());

  std::vector<TaskTiming> timings;
  for (const auto& r : run.records) timings.push_back({r.task_id, r.is_load, r.duration_ms});
  run.wet = ComputeWet(timings);

  run.report = BuildReport(summary);
  run.report["run"] = {{"workload", config.workload_path},
                       {"source", config.source},
                       {"frequency_hz", mcfg.frequency_hz},
                       {"seed", config.seed},
                       {"aborted", run.aborted}};
  if (run.aborted) {
    run.report["run"]["error"] = run.error;
    run.report["run"]["error_kind"] = ErrorKindName(*run.error_kind);
  }
  {
    std::ofstream out(out_dir / "report.json", std::ios::binary);
    out << run.report.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::kIo, "cannot write report.json");
  }
  WriteSeriesCsv((out_dir / "series.csv").string(), summary.samples);
  return run;
}

}  // namespace insitu
