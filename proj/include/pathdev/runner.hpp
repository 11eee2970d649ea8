#pragma once

#include "pathdev/manifold.hpp"
#include "pathdev/transport.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pathdev {

struct IntegratorSettings {
  double step = 1e-3;    // integration and transport step
  int quad_panels = 0;   // 0 selects each task's default
  double fd_step = 1e-4;  // nested finite differences
};

/// Command-line overrides; applied before validation, so they enter the hash.
struct ConfigOverrides {
  std::optional<double> step;
  std::optional<int> quad_panels;
  std::optional<double> fd_step;
};

class PreparedTask;

/// Parsed, validated scenario with every expression compiled and every
/// curve built. Immutable and cheap to copy.
struct ScenarioConfig {
  std::string name;
  std::string origin;
  std::string task;
  std::string manifold_name;
  TransportKind transport = TransportKind::Parallel;
  IntegratorSettings integrator;
  std::string output_path;
  std::string output_format = "csv";
  std::string canonical;  // key-sorted JSON of the effective config
  std::string hash;       // FNV-1a of `canonical`, hex
  ManifoldPtr manifold;
  std::shared_ptr<const PreparedTask> prepared;

  std::size_t grid_size() const;
  std::vector<std::string> columns() const;
};

/// YAML or JSON file. Parse errors carry line and column; validation errors
/// name the offending key.
ScenarioConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                            const ConfigOverrides& overrides = {});

struct RunOptions {
  std::string output_dir;  // empty: PATHDEV_OUTPUT_DIR, then "."
  bool write_files = true;
  int threads = 0;  // 0: hardware concurrency
};

struct RunRecord {
  std::string scenario;
  std::string hash;
  std::string version;
  double wall_time = 0.0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // ordered by grid index
  std::size_t grid_size = 0;
  std::string evidence_json;
  std::string csv_path;
  std::string sidecar_path;
  bool complete = false;
  std::string error;
  std::optional<std::size_t> failed_point;

  /// Column index by name; throws Error(Argument) when absent.
  std::size_t column(const std::string& name) const;
};

/// A grid point failed. Rows before it have been written.
class RunError : public Error {
 public:
  RunError(ErrorKind kind, const std::string& what, RunRecord partial)
      : Error(kind, what), partial_(std::move(partial)) {}
  const RunRecord& partial() const { return partial_; }

 private:
  RunRecord partial_;
};

RunRecord run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Header row plus one line per row, 17 significant digits.
std::string format_csv(const RunRecord& record);

std::string catalog_text();
/// Array of {name, dim, params}.
std::string catalog_json();

std::string default_output_dir();
const char* toolkit_version();

/// 0 success, 2 config, 3 numerical, 4 domain or truncation.
int exit_code_for(ErrorKind kind);

}  // namespace pathdev
