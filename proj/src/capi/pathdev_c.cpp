#include "pathdev/pathdev.h"

#include "pathdev/displacement.hpp"
#include "pathdev/geometry.hpp"
#include "pathdev/oracles.hpp"
#include "pathdev/paths.hpp"
#include "pathdev/runner.hpp"

#include <cstring>
#include <new>
#include <string>

struct pd_manifold {
  pathdev::ManifoldPtr m;
};

struct pd_curve {
  pathdev::CurvePtr c;
};

struct pd_config {
  pathdev::ScenarioConfig cfg;
};

struct pd_run {
  pathdev::RunRecord rec;
};

namespace {

thread_local std::string last_error;

pd_status status_of(pathdev::ErrorKind kind) {
  using pathdev::ErrorKind;
  switch (kind) {
    case ErrorKind::Argument: return PD_ERR_ARGUMENT;
    case ErrorKind::Domain: return PD_ERR_DOMAIN;
    case ErrorKind::Stencil: return PD_ERR_STENCIL;
    case ErrorKind::Parse: return PD_ERR_PARSE;
    case ErrorKind::Config: return PD_ERR_CONFIG;
    case ErrorKind::Numerical: return PD_ERR_NUMERICAL;
    case ErrorKind::Truncation: return PD_ERR_TRUNCATION;
    case ErrorKind::ScenarioConsistency: return PD_ERR_SCENARIO;
    case ErrorKind::Degenerate: return PD_ERR_DEGENERATE;
  }
  return PD_ERR_INTERNAL;
}

template <class F>
pd_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return PD_OK;
  } catch (const pathdev::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return PD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return PD_ERR_INTERNAL;
  }
}

pd_status null_argument(const char* what) {
  last_error = std::string(what) + ": null argument";
  return PD_ERR_ARGUMENT;
}

pathdev::Vector vec(const double* p, int n) { return Eigen::Map<const pathdev::Vector>(p, n); }

void copy_out(const pathdev::Vector& v, double* out) { std::memcpy(out, v.data(), sizeof(double) * v.size()); }

void copy_out(const pathdev::Tensor& t, double* out) {
  std::memcpy(out, t.data().data(), sizeof(double) * t.size());
}

// Row-major copy of a column-major Eigen matrix.
void copy_out(const pathdev::Matrix& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

pathdev::TransportLaw law_for(const pd_manifold* m, double step) {
  if (!(step > 0.0)) throw pathdev::Error(pathdev::ErrorKind::Argument, "transport step must be positive");
  return m ? pathdev::TransportLaw::parallel(m->m, step) : pathdev::TransportLaw::euclidean(step);
}

pathdev::ConfigOverrides overrides_of(const pd_overrides* o) {
  pathdev::ConfigOverrides out;
  if (!o) return out;
  if (o->has_step) out.step = o->step;
  if (o->has_quad_panels) out.quad_panels = o->quad_panels;
  if (o->has_fd_step) out.fd_step = o->fd_step;
  return out;
}

char* duplicate(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

extern "C" {

const char* pd_version(void) { return pathdev::toolkit_version(); }

const char* pd_last_error(void) { return last_error.c_str(); }

const char* pd_status_name(pd_status status) {
  switch (status) {
    case PD_OK: return "ok";
    case PD_ERR_ARGUMENT: return "argument";
    case PD_ERR_DOMAIN: return "domain";
    case PD_ERR_STENCIL: return "stencil";
    case PD_ERR_PARSE: return "parse";
    case PD_ERR_CONFIG: return "config";
    case PD_ERR_NUMERICAL: return "numerical";
    case PD_ERR_TRUNCATION: return "truncation";
    case PD_ERR_SCENARIO: return "scenario";
    case PD_ERR_DEGENERATE: return "degenerate";
    case PD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

int pd_exit_code(pd_status status) {
  switch (status) {
    case PD_OK: return 0;
    case PD_ERR_ARGUMENT:
    case PD_ERR_PARSE:
    case PD_ERR_CONFIG:
    case PD_ERR_SCENARIO:
      return 2;
    case PD_ERR_DOMAIN:
    case PD_ERR_TRUNCATION:
      return 4;
    default:
      return 3;
  }
}

pd_status pd_manifold_create(const char* spec, pd_manifold** out) {
  if (!spec || !out) return null_argument("pd_manifold_create");
  return guarded([&] { *out = new pd_manifold{pathdev::make_manifold(spec)}; });
}

void pd_manifold_destroy(pd_manifold* m) { delete m; }

int pd_manifold_dim(const pd_manifold* m) { return m ? m->m->dim() : 0; }

pd_status pd_christoffel(const pd_manifold* m, const double* x, double* out) {
  if (!m || !x || !out) return null_argument("pd_christoffel");
  return guarded([&] { copy_out(m->m->christoffel(vec(x, m->m->dim())), out); });
}

pd_status pd_torsion(const pd_manifold* m, const double* x, double* out) {
  if (!m || !x || !out) return null_argument("pd_torsion");
  return guarded([&] { copy_out(pathdev::torsion_tensor(*m->m, vec(x, m->m->dim())), out); });
}

pd_status pd_curvature(const pd_manifold* m, const double* x, double* out) {
  if (!m || !x || !out) return null_argument("pd_curvature");
  return guarded([&] { copy_out(pathdev::curvature_tensor(*m->m, vec(x, m->m->dim())), out); });
}

pd_status pd_curve_expression(int dim, const char* const* components, double lo, double hi, pd_curve** out) {
  if (!components || !out || dim < 1) return null_argument("pd_curve_expression");
  return guarded([&] {
    std::vector<std::string> comps;
    for (int i = 0; i < dim; ++i) {
      if (!components[i]) throw pathdev::Error(pathdev::ErrorKind::Argument, "pd_curve_expression: null component");
      comps.emplace_back(components[i]);
    }
    *out = new pd_curve{pathdev::make_expression_curve("curve", comps, {lo, hi})};
  });
}

pd_status pd_curve_geodesic(const pd_manifold* m, const double* x0, const double* u0, double lo, double hi,
                            double step, pd_curve** out) {
  if (!m || !x0 || !u0 || !out) return null_argument("pd_curve_geodesic");
  return guarded([&] {
    const int n = m->m->dim();
    *out = new pd_curve{pathdev::integrate_geodesic(*m->m, vec(x0, n), vec(u0, n), {lo, hi}, {}, step)};
  });
}

void pd_curve_destroy(pd_curve* c) { delete c; }

pd_status pd_curve_point(const pd_curve* c, double t, double* out) {
  if (!c || !out) return null_argument("pd_curve_point");
  return guarded([&] {
    c->c->require_parameter(t, "pd_curve_point");
    copy_out(c->c->point(t), out);
  });
}

pd_status pd_curve_tangent(const pd_curve* c, double t, double* out) {
  if (!c || !out) return null_argument("pd_curve_tangent");
  return guarded([&] {
    c->c->require_parameter(t, "pd_curve_tangent");
    copy_out(c->c->tangent(t), out);
  });
}

pd_status pd_transport_matrix(const pd_manifold* m, const pd_curve* c, double s, double t, double step,
                              double* out) {
  if (!c || !out) return null_argument("pd_transport_matrix");
  return guarded([&] { copy_out(pathdev::transport_matrix(law_for(m, step), *c->c, s, t).H, out); });
}

pd_status pd_displacement(const pd_manifold* m, const pd_curve* c, double s, double t, double step, int panels,
                          double* out) {
  if (!c || !out) return null_argument("pd_displacement");
  return guarded([&] {
    copy_out(pathdev::displacement_vector(law_for(m, step), *c->c, s, t, panels).vector.components, out);
  });
}

pd_status pd_holonomy_curvature(const pd_manifold* m, const double* x, int k, int l, double eps, double* out) {
  if (!m || !x || !out) return null_argument("pd_holonomy_curvature");
  return guarded([&] { copy_out(pathdev::holonomy_curvature(*m->m, vec(x, m->m->dim()), k, l, eps), out); });
}

pd_status pd_config_load(const char* path, const pd_overrides* overrides, pd_config** out) {
  if (!path || !out) return null_argument("pd_config_load");
  return guarded([&] { *out = new pd_config{pathdev::load_config(path, overrides_of(overrides))}; });
}

pd_status pd_config_parse(const char* text, const pd_overrides* overrides, pd_config** out) {
  if (!text || !out) return null_argument("pd_config_parse");
  return guarded([&] { *out = new pd_config{pathdev::parse_config(text, "<string>", overrides_of(overrides))}; });
}

void pd_config_destroy(pd_config* cfg) { delete cfg; }

const char* pd_config_name(const pd_config* cfg) { return cfg ? cfg->cfg.name.c_str() : ""; }
const char* pd_config_task(const pd_config* cfg) { return cfg ? cfg->cfg.task.c_str() : ""; }
const char* pd_config_hash(const pd_config* cfg) { return cfg ? cfg->cfg.hash.c_str() : ""; }
size_t pd_config_grid_size(const pd_config* cfg) { return cfg ? cfg->cfg.grid_size() : 0; }

pd_status pd_run_scenario(const pd_config* cfg, const pd_run_options* options, pd_run** out) {
  if (!cfg || !out) return null_argument("pd_run_scenario");
  *out = nullptr;
  pathdev::RunOptions opts;
  if (options) {
    if (options->output_dir) opts.output_dir = options->output_dir;
    opts.write_files = options->write_files != 0;
    opts.threads = options->threads;
  }
  return guarded([&] {
    try {
      *out = new pd_run{pathdev::run_scenario(cfg->cfg, opts)};
    } catch (const pathdev::RunError& e) {
      *out = new pd_run{e.partial()};
      throw;
    }
  });
}

void pd_run_destroy(pd_run* run) { delete run; }

size_t pd_run_rows(const pd_run* run) { return run ? run->rec.rows.size() : 0; }
size_t pd_run_columns(const pd_run* run) { return run ? run->rec.columns.size() : 0; }

const char* pd_run_column_name(const pd_run* run, size_t column) {
  if (!run || column >= run->rec.columns.size()) return "";
  return run->rec.columns[column].c_str();
}

double pd_run_value(const pd_run* run, size_t row, size_t column) {
  if (!run || row >= run->rec.rows.size() || column >= run->rec.rows[row].size()) return 0.0;
  return run->rec.rows[row][column];
}

int pd_run_complete(const pd_run* run) { return run && run->rec.complete ? 1 : 0; }
double pd_run_wall_time(const pd_run* run) { return run ? run->rec.wall_time : 0.0; }
const char* pd_run_csv_path(const pd_run* run) { return run ? run->rec.csv_path.c_str() : ""; }
const char* pd_run_sidecar_path(const pd_run* run) { return run ? run->rec.sidecar_path.c_str() : ""; }
const char* pd_run_evidence(const pd_run* run) { return run ? run->rec.evidence_json.c_str() : ""; }

pd_status pd_catalog(int as_json, char** out) {
  if (!out) return null_argument("pd_catalog");
  return guarded([&] { *out = duplicate(as_json ? pathdev::catalog_json() : pathdev::catalog_text()); });
}

void pd_string_free(char* s) { std::free(s); }

}  // extern "C"
