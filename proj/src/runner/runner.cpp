#include "detail.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#ifndef PATHDEV_VERSION
#define PATHDEV_VERSION "0.0.0"
#endif

namespace pathdev {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Config, "write failed for " + path.string());
}

std::string sidecar(const ScenarioConfig& cfg, const RunRecord& rec, const json& evidence, ErrorKind kind) {
  json j;
  j["scenario"] = rec.scenario;
  j["task"] = cfg.task;
  j["manifold"] = cfg.manifold_name;
  j["transport"] = cfg.transport == TransportKind::Parallel ? "parallel" : "euclidean";
  j["integrator"] = {{"step", cfg.integrator.step},
                     {"quad_panels", cfg.integrator.quad_panels},
                     {"fd_step", cfg.integrator.fd_step}};
  j["config_hash"] = rec.hash;
  j["toolkit_version"] = rec.version;
  j["wall_time_seconds"] = rec.wall_time;
  j["grid_size"] = rec.grid_size;
  j["rows_written"] = rec.rows.size();
  j["complete"] = rec.complete;
  j["columns"] = rec.columns;
  j["csv"] = std::filesystem::path(rec.csv_path).filename().string();
  j["evidence"] = evidence;
  if (!rec.complete) {
    j["error"] = {{"message", rec.error}, {"exit_code", exit_code_for(kind)}};
    if (rec.failed_point) j["error"]["grid_index"] = *rec.failed_point;
  }
  j["config"] = json::parse(cfg.canonical);
  return j.dump(2) + "\n";
}

}  // namespace

std::size_t RunRecord::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorKind::Argument, "run record has no column '" + name + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::string format_csv(const RunRecord& record) {
  std::string out;
  for (std::size_t c = 0; c < record.columns.size(); ++c) out += (c ? "," : "") + record.columns[c];
  out += '\n';
  char buf[40];
  for (const auto& row : record.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

RunRecord run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
  if (!cfg.prepared) throw Error(ErrorKind::Argument, "run_scenario: the config was not loaded");
  const PreparedTask& task = *cfg.prepared;
  RunRecord rec;
  rec.scenario = cfg.name;
  rec.hash = cfg.hash;
  rec.version = toolkit_version();
  rec.columns = task.columns();
  rec.grid_size = task.size();

  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = task.size();
  std::vector<std::vector<double>> results(n);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_failure{n};
  std::mutex failure_mutex;
  std::string failure_message;
  ErrorKind failure_kind = ErrorKind::Numerical;

  auto record_failure = [&](std::size_t i, ErrorKind kind, const std::string& what) {
    std::lock_guard<std::mutex> lock(failure_mutex);
    if (i < first_failure.load()) {
      first_failure.store(i);
      failure_kind = kind;
      failure_message = what;
    }
  };
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      if (i > first_failure.load()) continue;
      try {
        results[i] = task.evaluate(i);
      } catch (const Error& e) {
        record_failure(i, e.kind(), e.what());
      } catch (const std::exception& e) {
        record_failure(i, ErrorKind::Numerical, e.what());
      }
    }
  };

  unsigned threads = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const std::size_t failed = first_failure.load();
  rec.complete = failed == n;
  rec.rows.assign(std::make_move_iterator(results.begin()),
                  std::make_move_iterator(results.begin() + static_cast<std::ptrdiff_t>(failed)));
  json evidence = json::object();
  if (rec.complete) {
    try {
      evidence = task.evidence(rec.rows);
    } catch (const Error& e) {
      evidence["error"] = e.what();
    }
  } else {
    rec.failed_point = failed;
    rec.error = "grid point " + std::to_string(failed) + " (" + task.describe(failed) + "): " + failure_message;
    evidence["partial"] = true;
  }
  rec.evidence_json = evidence.dump();
  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (options.write_files) {
    const std::filesystem::path dir = options.output_dir.empty() ? default_output_dir() : options.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Config, "cannot create output directory " + dir.string() + ": " + ec.message());
    const std::filesystem::path stem = dir / cfg.output_path;
    if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path(), ec);
    rec.csv_path = stem.string() + ".csv";
    rec.sidecar_path = stem.string() + ".json";
    write_text(rec.csv_path, format_csv(rec));
    write_text(rec.sidecar_path, sidecar(cfg, rec, evidence, failure_kind));
  }

  if (!rec.complete) throw RunError(failure_kind, cfg.name + ": " + rec.error, rec);
  return rec;
}

std::string catalog_text() {
  std::ostringstream out;
  out << "Manifolds:\n";
  for (const auto& e : manifold_catalog()) {
    char line[160];
    const std::string dim = e.dim > 0 ? std::to_string(e.dim) : "n";
    std::snprintf(line, sizeof line, "  %-20s dim %-3s %s\n", e.name.c_str(), dim.c_str(), e.description.c_str());
    out << line;
  }
  out << "Tasks:\n";
  for (const auto& t : task_names()) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-20s %s\n", t.c_str(), task_summary(t).c_str());
    out << line;
  }
  return out.str();
}

std::string catalog_json() {
  json arr = json::array();
  for (const auto& e : manifold_catalog()) {
    json item;
    item["name"] = e.name;
    item["dim"] = e.dim > 0 ? json(e.dim) : json(nullptr);
    item["params"] = e.params;
    arr.push_back(item);
  }
  return arr.dump(2) + "\n";
}

std::string default_output_dir() {
  const char* env = std::getenv("PATHDEV_OUTPUT_DIR");
  return env && *env ? env : ".";
}

const char* toolkit_version() { return PATHDEV_VERSION; }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Argument:
    case ErrorKind::Parse:
    case ErrorKind::Config:
    case ErrorKind::ScenarioConsistency:
      return 2;
    case ErrorKind::Domain:
    case ErrorKind::Truncation:
      return 4;
    default:
      return 3;
  }
}

}  // namespace pathdev
