#include "pathdev/pathdev.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

struct Overrides {
  std::optional<double> step;
  std::optional<int> quad_panels;
  std::optional<double> fd_step;

  pd_overrides to_c() const {
    pd_overrides o{};
    o.has_step = step.has_value();
    o.step = step.value_or(0.0);
    o.has_quad_panels = quad_panels.has_value();
    o.quad_panels = quad_panels.value_or(0);
    o.has_fd_step = fd_step.has_value();
    o.fd_step = fd_step.value_or(0.0);
    return o;
  }
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--step", o.step, "integration and transport step")->check(CLI::PositiveNumber);
  app->add_option("--quad-panels", o.quad_panels, "quadrature panels (0 = task default)")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--fd-step", o.fd_step, "finite-difference step")->check(CLI::PositiveNumber);
}

int fail(pd_status status) {
  std::fprintf(stderr, "error [%s]: %s\n", pd_status_name(status), pd_last_error());
  return pd_exit_code(status);
}

pd_config* load(const std::string& path, const Overrides& o, int& code) {
  pd_config* cfg = nullptr;
  const pd_overrides c = o.to_c();
  const pd_status st = pd_config_load(path.c_str(), &c, &cfg);
  code = st == PD_OK ? 0 : fail(st);
  return cfg;
}

int run(const std::string& path, const Overrides& o, const std::string& output, int threads, bool quiet) {
  int code = 0;
  pd_config* cfg = load(path, o, code);
  if (!cfg) return code;
  pd_run_options opts{};
  opts.output_dir = output.empty() ? nullptr : output.c_str();
  opts.write_files = 1;
  opts.threads = threads;
  pd_run* rec = nullptr;
  const pd_status st = pd_run_scenario(cfg, &opts, &rec);
  if (st != PD_OK) {
    code = fail(st);
    if (rec) std::fprintf(stderr, "partial results (%zu rows) in %s\n", pd_run_rows(rec), pd_run_csv_path(rec));
  } else if (!quiet) {
    std::printf("%s: %zu rows -> %s (%.3f s)\n", pd_config_name(cfg), pd_run_rows(rec), pd_run_csv_path(rec),
                pd_run_wall_time(rec));
  }
  pd_run_destroy(rec);
  pd_config_destroy(cfg);
  return code;
}

int check(const std::string& path, const Overrides& o) {
  int code = 0;
  pd_config* cfg = load(path, o, code);
  if (!cfg) return code;
  std::printf("ok: %s task=%s grid=%zu hash=%s\n", pd_config_name(cfg), pd_config_task(cfg),
              pd_config_grid_size(cfg), pd_config_hash(cfg));
  pd_config_destroy(cfg);
  return 0;
}

int catalog(bool json) {
  char* text = nullptr;
  const pd_status st = pd_catalog(json ? 1 : 0, &text);
  if (st != PD_OK) return fail(st);
  std::fputs(text, stdout);
  pd_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathdev: transports, displacement and deviation vectors along paths"};
  app.set_version_flag("--version", std::string(pd_version()));
  app.require_subcommand(1);

  Overrides run_overrides, check_overrides;
  std::string run_path, check_path, output;
  int threads = 0;
  bool quiet = false;
  bool as_json = false;

  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario and write CSV plus a JSON sidecar");
  run_cmd->add_option("config", run_path, "scenario file (YAML or JSON)")->required();
  add_overrides(run_cmd, run_overrides);
  run_cmd->add_option("--output", output, "output directory (default: $PATHDEV_OUTPUT_DIR or .)");
  run_cmd->add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run_cmd->add_flag("--quiet", quiet, "no summary line");

  CLI::App* check_cmd = app.add_subcommand("check", "validate a scenario without running it");
  check_cmd->add_option("config", check_path, "scenario file (YAML or JSON)")->required();
  add_overrides(check_cmd, check_overrides);

  CLI::App* catalog_cmd = app.add_subcommand("catalog", "list built-in manifolds and tasks");
  catalog_cmd->add_flag("--json", as_json, "machine-readable manifold list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*run_cmd) return run(run_path, run_overrides, output, threads, quiet);
  if (*check_cmd) return check(check_path, check_overrides);
  return catalog(as_json);
}
