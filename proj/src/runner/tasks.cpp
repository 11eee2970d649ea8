#include "detail.hpp"

#include "pathdev/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pathdev {

namespace {

constexpr int kDeviationPanels = 64;
constexpr int kMotionPanels = 32;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<std::string> indexed(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& more) {
  to.insert(to.end(), more.begin(), more.end());
}

void append(std::vector<double>& to, const Vector& v) { to.insert(to.end(), v.data(), v.data() + v.size()); }

double column_max(const std::vector<std::vector<double>>& rows, std::size_t col) {
  double m = 0.0;
  for (const auto& r : rows)
    if (col < r.size()) m = std::max(m, std::abs(r[col]));
  return m;
}

json column_summary(const std::vector<std::string>& columns, const std::vector<std::vector<double>>& rows,
                    const std::vector<std::string>& names) {
  json out = json::object();
  for (const auto& name : names) {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it != columns.end())
      out["max_" + name] = column_max(rows, static_cast<std::size_t>(it - columns.begin()));
  }
  return out;
}

/// Rethrows module errors with the config path in front.
template <class F>
auto at_path(const cfg::Node& n, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw Error(ErrorKind::Parse, n.path() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), n.path() + ": " + e.what());
  }
}

struct ExprVector {
  std::vector<Expression> parts;

  Vector operator()(const std::vector<double>& args) const {
    Vector out(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) out[static_cast<Eigen::Index>(i)] = parts[i].evaluate(args);
    return out;
  }
};

ExprVector compile(const cfg::Node& n, std::size_t count, const std::vector<std::string>& vars) {
  const auto sources = n.strings(count);
  ExprVector out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    try {
      out.parts.push_back(Expression::parse(sources[i], vars));
    } catch (const ParseError& e) {
      throw Error(ErrorKind::Parse, n.item(i).path() + ": " + e.what());
    }
  }
  return out;
}

Expression compile_scalar(const cfg::Node& n, const std::vector<std::string>& vars) {
  try {
    return n.raw().is_number() ? Expression::constant(n.number(), vars) : Expression::parse(n.text(), vars);
  } catch (const ParseError& e) {
    throw Error(ErrorKind::Parse, n.path() + ": " + e.what());
  }
}

/// {lead..., x1..xn, u1..un}
std::vector<std::string> state_vars(std::vector<std::string> lead, int dim) {
  append(lead, indexed("x", dim));
  append(lead, indexed("u", dim));
  return lead;
}

std::vector<double> state_args(std::vector<double> lead, const Vector& x, const Vector& u) {
  append(lead, x);
  append(lead, u);
  return lead;
}

CurvePtr shifted(const CurvePtr& c, const Vector& offset, std::string id) {
  return std::make_shared<AnalyticCurve>(
      std::move(id), c->interval(), c->dim(), [c, offset](double t) { return Vector(c->point(t) + offset); },
      [c](double t) { return c->tangent(t); });
}

Interval overlap(const Interval& a, const Interval& b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

void require_in(const cfg::Node& n, const std::vector<double>& values, const Interval& iv, const char* what) {
  for (double v : values)
    if (!iv.contains(v))
      n.fail(num(v) + " lies outside the " + what + " [" + num(iv.lo) + ", " + num(iv.hi) + "]");
}

int panels_or(const TaskContext& ctx, int fallback) {
  return ctx.integrator.quad_panels > 0 ? ctx.integrator.quad_panels : fallback;
}

std::vector<std::string> residual_list(const cfg::Node& block, std::initializer_list<const char*> known,
                                       std::vector<std::string> fallback) {
  auto n = block.find("residuals");
  if (!n) return fallback;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n->size(); ++i) out.push_back(n->item(i).choice(known));
  return out;
}

bool wants(const std::vector<std::string>& list, const char* name) {
  return std::find(list.begin(), list.end(), name) != list.end();
}

// ---------------------------------------------------------------------------
// Shared builders

std::shared_ptr<const ForcedFamily> parse_family(const cfg::Node& n, const TaskContext& ctx) {
  n.allow({"chi", "phi", "force", "s_range", "r_range", "r_nodes", "s_step"});
  const int dim = ctx.manifold->dim();
  const ExprVector chi = compile(n.at("chi"), static_cast<std::size_t>(dim), {"r"});
  const ExprVector phi = compile(n.at("phi"), static_cast<std::size_t>(dim), {"r"});
  const ExprVector force = compile(n.at("force"), static_cast<std::size_t>(dim), state_vars({"s", "r"}, dim));
  const Interval s_range = n.at("s_range").interval();
  const Interval r_range = n.at("r_range").interval();
  int r_nodes = 33;
  if (auto rn = n.find("r_nodes")) {
    r_nodes = rn->integer();
    if (r_nodes < 3) rn->fail("must be at least 3");
  }
  const double s_step = cfg::positive_or(n, "s_step", ctx.integrator.step);
  return at_path(n, [&] {
    return std::shared_ptr<const ForcedFamily>(std::make_shared<ForcedFamily>(
        ctx.manifold, [chi](double r) { return chi({r}); }, [phi](double r) { return phi({r}); },
        [force](double s, double r, const Vector& x, const Vector& u) { return force(state_args({s, r}, x, u)); },
        s_range, r_range, s_step, r_nodes));
  });
}

ObserverSpec parse_observer(const std::optional<cfg::Node>& n, const TaskContext& ctx) {
  ObserverSpec spec;
  if (!n) return spec;
  if (n->is_string()) {
    n->choice({"x1"});
    return spec;
  }
  n->allow({"x0", "u0", "force", "eta_span"});
  const int dim = ctx.manifold->dim();
  spec.is_x1 = false;
  spec.x0 = n->at("x0").vector(dim);
  spec.u0 = n->at("u0").vector(dim);
  spec.eta_span = cfg::positive_or(*n, "eta_span", 1.0);
  spec.step = ctx.integrator.step;
  if (auto f = n->find("force")) {
    const ExprVector force = compile(*f, static_cast<std::size_t>(dim), state_vars({"s"}, dim));
    spec.force = [force](double s, const Vector& x, const Vector& u) { return force(state_args({s}, x, u)); };
  } else {
    spec.force = [dim](double, const Vector&, const Vector&) { return Vector(Vector::Zero(dim)); };
  }
  return spec;
}

ConnectorOptions parse_connectors(const std::optional<cfg::Node>& n, const TaskContext& ctx) {
  ConnectorOptions opts;
  opts.shooting.step = std::min(opts.shooting.step, ctx.integrator.step);
  if (!n) return opts;
  n->allow({"gamma", "eta", "gamma_span", "eta_span"});
  auto kind = [](const cfg::Node& k) {
    return k.choice({"geodesic", "segment"}) == "geodesic" ? ConnectorKind::Geodesic : ConnectorKind::Segment;
  };
  if (auto g = n->find("gamma")) opts.gamma = kind(*g);
  if (auto e = n->find("eta")) opts.eta = kind(*e);
  opts.gamma_span = cfg::positive_or(*n, "gamma_span", 1.0);
  opts.eta_span = cfg::positive_or(*n, "eta_span", 1.0);
  return opts;
}

FamilyForceFn family_force(const std::shared_ptr<const ForcedFamily>& fam) {
  return [fam](double s, double r) { return fam->force(s, r); };
}

struct ScenarioBundle {
  DeviationScenario scn;
  std::shared_ptr<const ForcedFamily> family;
  double r1 = 0.0;
  double r2 = 0.0;
};

const std::vector<std::string> kConnectorKeys = {"x1", "x2", "observer", "connectors", "s_range", "tau1", "tau2"};
const std::vector<std::string> kCongruenceKeys = {"congruence", "v1", "v2", "u_range"};
const std::vector<std::string> kFamilyKeys = {"family", "r1", "r2", "observer"};

ScenarioBundle build_connector(const cfg::Node& b, const TaskContext& ctx) {
  ScenarioBundle out;
  const CurvePtr x1 = parse_curve(b.at("x1"), ctx, "x1");
  const CurvePtr x2 = parse_curve(b.at("x2"), ctx, "x2");
  bool observer_is_x1 = true;
  CurvePtr x = x1;
  Interval range = overlap(x1->interval(), x2->interval());
  if (auto o = b.find("observer"); o && !o->is_string()) {
    x = parse_curve(*o, ctx, "observer");
    observer_is_x1 = false;
    range = overlap(range, x->interval());
  } else if (o) {
    o->choice({"x1"});
  }
  if (auto r = b.find("s_range")) {
    const Interval want = r->interval();
    if (want.lo < range.lo - 1e-12 || want.hi > range.hi + 1e-12) r->fail("exceeds the curves' common interval");
    range = want;
  }
  if (!(range.lo < range.hi)) b.fail("x1, x2 and the observer have no common parameter interval");
  ConnectorOptions opts = parse_connectors(b.find("connectors"), ctx);
  if (auto t = b.find("tau1")) {
    const Expression e = compile_scalar(*t, {"s"});
    const Expression rate = e.derivative(0);
    opts.tau1 = [e](double s) { return e.evaluate(std::vector<double>{s}); };
    opts.tau1_rate = [rate](double s) { return rate.evaluate(std::vector<double>{s}); };
  }
  if (auto t = b.find("tau2")) {
    const Expression e = compile_scalar(*t, {"s"});
    opts.tau2 = [e](double s) { return e.evaluate(std::vector<double>{s}); };
  }
  for (const char* key : {"tau1", "tau2"}) {
    if (!b.has(key)) continue;
    const ScalarFn& tau = std::string(key) == "tau1" ? opts.tau1 : opts.tau2;
    const Interval& target = std::string(key) == "tau1" ? x1->interval() : x2->interval();
    for (int k = 0; k <= 16; ++k) {
      const double v = tau(range.lo + range.length() * k / 16.0);
      if (!target.contains(v)) b.at(key).fail("maps the s range outside the curve's interval");
    }
  }
  out.scn = at_path(b, [&] { return make_connector_scenario(ctx.manifold, x1, x2, x, range, opts, observer_is_x1); });
  return out;
}

ScenarioBundle build_congruence(const cfg::Node& b, const TaskContext& ctx) {
  ScenarioBundle out;
  const int dim = ctx.manifold->dim();
  const cfg::Node c = b.at("congruence");
  const auto comps = c.strings(static_cast<std::size_t>(dim));
  const Congruence cong = at_path(c, [&] { return make_expression_congruence(comps, ctx.integrator.fd_step); });
  const double v1 = b.at("v1").number();
  const double v2 = b.at("v2").number();
  if (!(v1 < v2)) b.at("v2").fail("must exceed v1");
  out.scn = make_congruence_scenario(cong, v1, v2, b.at("u_range").interval());
  return out;
}

ScenarioBundle build_family(const cfg::Node& b, const TaskContext& ctx) {
  ScenarioBundle out;
  out.family = parse_family(b.at("family"), ctx);
  out.r1 = b.at("r1").number();
  out.r2 = b.at("r2").number();
  if (!out.family->r_range().contains(out.r1, 0.0)) b.at("r1").fail("outside family.r_range");
  if (!out.family->r_range().contains(out.r2, 0.0)) b.at("r2").fail("outside family.r_range");
  if (!(out.r1 < out.r2)) b.at("r2").fail("must exceed r1");
  const ObserverSpec observer = parse_observer(b.find("observer"), ctx);
  out.scn = at_path(b, [&] { return make_forced_family_scenario(out.family, out.r1, out.r2, observer); });
  return out;
}

double quadrature_estimate(const TransportLaw& law, const DeviationScenario& scn, double s, int panels,
                           const Vector& h) {
  int half = std::max(2, panels / 2);
  if (half % 2) ++half;
  return (h - deviation_vector(law, scn, s, half).components).norm() / 15.0;
}

json order_evidence(const std::vector<std::vector<double>>& rows, std::size_t step_col, std::size_t err_col) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r[step_col], r[err_col]);
  std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.first > b.first; });
  std::vector<double> steps, errors;
  for (auto& [s, e] : pts) {
    steps.push_back(s);
    errors.push_back(e);
  }
  json out;
  try {
    out = json::parse(fit_order(steps, errors).to_json());
  } catch (const Error& e) {
    out["parameter_values"] = steps;
    out["errors"] = errors;
    out["fitted_order"] = nullptr;
    out["note"] = e.what();
  }
  return out;
}

// ---------------------------------------------------------------------------

class TransportTask final : public PreparedTask {
 public:
  TransportTask(const cfg::Node& b, const TaskContext& ctx) : ctx_(ctx) {
    b.allow({"curve", "source", "target", "vector", "compose_via"});
    curve_ = parse_curve(b.at("curve"), ctx, "curve");
    const Interval iv = curve_->interval();
    source_ = b.has("source") ? b.at("source").number() : iv.lo;
    if (b.has("source")) require_in(b.at("source"), {source_}, iv, "curve interval");
    targets_ = b.at("target").grid();
    require_in(b.at("target"), targets_, iv, "curve interval");
    if (auto v = b.find("vector")) vector_ = v->vector(ctx.manifold->dim());
    if (auto r = b.find("compose_via")) {
      via_ = r->number();
      require_in(*r, {*via_}, iv, "curve interval");
    }
  }

  std::vector<std::string> columns() const override {
    std::vector<std::string> c{"t"};
    const int n = ctx_.manifold->dim();
    if (vector_) {
      append(c, indexed("v", n));
    } else {
      for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) c.push_back("H_" + std::to_string(i) + "_" + std::to_string(j));
    }
    if (via_) c.push_back("compose_residual");
    return c;
  }
  std::size_t size() const override { return targets_.size(); }
  std::string describe(std::size_t i) const override { return "t=" + num(targets_[i]); }

  std::vector<double> evaluate(std::size_t i) const override {
    const double t = targets_[i];
    const Matrix h = transport_matrix(ctx_.law, *curve_, source_, t).H;
    std::vector<double> row{t};
    if (vector_) {
      append(row, h * *vector_);
    } else {
      for (Eigen::Index a = 0; a < h.rows(); ++a)
        for (Eigen::Index b = 0; b < h.cols(); ++b) row.push_back(h(a, b));
    }
    if (via_) row.push_back(compose_check(ctx_.law, *curve_, source_, t, *via_));
    return row;
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    json out = column_summary(columns(), rows, {"compose_residual"});
    const Matrix id = transport_matrix(ctx_.law, *curve_, source_, source_).H;
    out["identity_residual"] = max_abs(id - Matrix::Identity(id.rows(), id.cols()));
    return out;
  }

 private:
  TaskContext ctx_;
  CurvePtr curve_;
  double source_ = 0.0;
  std::vector<double> targets_;
  std::optional<Vector> vector_;
  std::optional<double> via_;
};

class DisplacementTask final : public PreparedTask {
 public:
  DisplacementTask(const cfg::Node& b, const TaskContext& ctx) : ctx_(ctx) {
    b.allow({"curve", "s", "t", "r", "residuals"});
    curve_ = parse_curve(b.at("curve"), ctx, "curve");
    const Interval iv = curve_->interval();
    const auto s = b.at("s").grid();
    const auto t = b.at("t").grid();
    require_in(b.at("s"), s, iv, "curve interval");
    require_in(b.at("t"), t, iv, "curve interval");
    std::vector<double> r{0.0};
    has_r_ = b.has("r");
    if (has_r_) {
      r = b.at("r").grid();
      require_in(b.at("r"), r, iv, "curve interval");
    }
    residuals_ = residual_list(b, {"coordinate_difference", "tangent_line", "composition"}, {});
    if (has_r_ && !wants(residuals_, "composition")) residuals_.push_back("composition");
    if (!has_r_ && wants(residuals_, "composition")) b.fail("the composition residual needs an 'r' grid");
    for (double a : s)
      for (double c : t)
        for (double d : r) points_.push_back({a, c, d});
    panels_ = ctx.integrator.quad_panels;
  }

  std::vector<std::string> columns() const override {
    std::vector<std::string> c{"s", "t"};
    if (has_r_) c.push_back("r");
    append(c, indexed("d", ctx_.manifold->dim()));
    for (const auto& r : residuals_) c.push_back(r + "_residual");
    return c;
  }
  std::size_t size() const override { return points_.size(); }
  std::string describe(std::size_t i) const override {
    const auto& p = points_[i];
    return "s=" + num(p[0]) + ", t=" + num(p[1]) + (has_r_ ? ", r=" + num(p[2]) : "");
  }

  std::vector<double> evaluate(std::size_t i) const override {
    const auto& p = points_[i];
    const double s = p[0], t = p[1];
    std::vector<double> row{s, t};
    if (has_r_) row.push_back(p[2]);
    const Vector d = displacement_vector(ctx_.law, *curve_, s, t, panels_).vector.components;
    append(row, d);
    for (const auto& r : residuals_) {
      if (r == "coordinate_difference")
        row.push_back((d - (curve_->point(t) - curve_->point(s))).norm());
      else if (r == "tangent_line")
        row.push_back((d - (t - s) * curve_->tangent(s)).norm());
      else
        row.push_back(composition_residual(ctx_.law, *curve_, p[2], s, t, panels_));
    }
    return row;
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    std::vector<std::string> names;
    for (const auto& r : residuals_) names.push_back(r + "_residual");
    return column_summary(columns(), rows, names);
  }

 private:
  TaskContext ctx_;
  CurvePtr curve_;
  bool has_r_ = false;
  std::vector<std::array<double, 3>> points_;
  std::vector<std::string> residuals_;
  int panels_ = 0;
};

class DeviationTask final : public PreparedTask {
 public:
  DeviationTask(const cfg::Node& b, const TaskContext& ctx) : ctx_(ctx) {
    const std::string kind = b.at("scenario").choice({"connector", "congruence", "forced_family"});
    std::vector<std::string> keys{"scenario", "s", "residuals", "s_step"};
    const auto& extra = kind == "connector" ? kConnectorKeys : kind == "congruence" ? kCongruenceKeys : kFamilyKeys;
    keys.insert(keys.end(), extra.begin(), extra.end());
    b.allow(keys);
    bundle_ = kind == "connector"    ? build_connector(b, ctx)
              : kind == "congruence" ? build_congruence(b, ctx)
                                     : build_family(b, ctx);
    s_ = b.at("s").grid();
    s_step_ = cfg::positive_or(b, "s_step", 1e-2);
    residuals_ = residual_list(b, {"matrix_form", "quadrature", "infinitesimal", "second_derivative"},
                               {"matrix_form", "quadrature"});
    const Interval& iv = bundle_.scn.s_range;
    const double margin = wants(residuals_, "second_derivative") ? 2.0 * s_step_ : 0.0;
    require_in(b.at("s"), s_, {iv.lo + margin, iv.hi - margin},
               margin > 0.0 ? "s range shrunk by the second-derivative stencil" : "s range");
    panels_ = panels_or(ctx, kDeviationPanels);
  }

  std::vector<std::string> columns() const override {
    const int n = ctx_.manifold->dim();
    std::vector<std::string> c{"s"};
    append(c, indexed("h", n));
    for (const auto& r : residuals_) {
      if (r == "matrix_form") c.push_back("matrix_form_discrepancy");
      if (r == "quadrature") c.push_back("quadrature_estimate");
      if (r == "infinitesimal") c.push_back("infinitesimal_residual");
      if (r == "second_derivative") append(c, indexed("D2h", n));
    }
    return c;
  }
  std::size_t size() const override { return s_.size(); }
  std::string describe(std::size_t i) const override { return "s=" + num(s_[i]); }

  std::vector<double> evaluate(std::size_t i) const override {
    const double s = s_[i];
    const auto& scn = bundle_.scn;
    const Vector h = deviation_vector(ctx_.law, scn, s, panels_).components;
    std::vector<double> row{s};
    append(row, h);
    for (const auto& r : residuals_) {
      if (r == "matrix_form")
        row.push_back((h - deviation_vector_matrix_form(ctx_.law, scn, s, panels_).components).norm());
      if (r == "quadrature") row.push_back(quadrature_estimate(ctx_.law, scn, s, panels_, h));
      if (r == "infinitesimal") row.push_back((h - infinitesimal_deviation(scn, s).components).norm());
      if (r == "second_derivative") append(row, fd_second_deviation(scn, ctx_.law, s, s_step_, panels_));
    }
    return row;
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    json out = column_summary(columns(), rows,
                              {"matrix_form_discrepancy", "quadrature_estimate", "infinitesimal_residual"});
    out["panels"] = panels_;
    return out;
  }

 private:
  TaskContext ctx_;
  ScenarioBundle bundle_;
  std::vector<double> s_;
  double s_step_ = 1e-2;
  std::vector<std::string> residuals_;
  int panels_ = kDeviationPanels;
};

class JacobiTask final : public PreparedTask {
 public:
  JacobiTask(const cfg::Node& b, const TaskContext& ctx) : ctx_(ctx) {
    b.allow({"x0", "u0", "interval", "h0", "dh0", "u", "reference_norm", "separation", "separation_delta"});
    const int n = ctx.manifold->dim();
    x0_ = b.at("x0").vector(n);
    u0_ = b.at("u0").vector(n);
    interval_ = b.at("interval").interval();
    h0_ = b.at("h0").vector(n);
    dh0_ = b.at("dh0").vector(n);
    samples_ = b.at("u").grid();
    require_in(b.at("u"), samples_, interval_, "interval");
    if (auto r = b.find("reference_norm")) reference_ = compile_scalar(*r, {"u"});
    if (auto s = b.find("separation")) separation_ = s->boolean();
    delta_ = cfg::positive_or(b, "separation_delta", 1e-4);
    base_ = at_path(b, [&] {
      return integrate_geodesic(*ctx.manifold, x0_, u0_, interval_, {}, ctx.integrator.step, "jacobi_base");
    });
  }

  std::vector<std::string> columns() const override {
    const int n = ctx_.manifold->dim();
    std::vector<std::string> c{"u"};
    append(c, indexed("h", n));
    append(c, indexed("dh", n));
    c.push_back("h_norm");
    if (reference_) append(c, {"reference", "relative_error"});
    if (separation_) {
      append(c, indexed("separation", n));
      append(c, {"separation_convergence", "separation_discrepancy"});
    }
    return c;
  }
  std::size_t size() const override { return samples_.size(); }
  std::string describe(std::size_t i) const override { return "u=" + num(samples_[i]); }

  std::vector<double> evaluate(std::size_t i) const override {
    const double u = samples_[i];
    Vector h = h0_, dh = dh0_;
    if (u > interval_.lo) {
      const auto states = integrate_geodesic_deviation(*ctx_.manifold, *base_, h0_, dh0_, {interval_.lo, u},
                                                       ctx_.integrator.step);
      h = states.back().h;
      dh = states.back().dh;
    }
    std::vector<double> row{u};
    append(row, h);
    append(row, dh);
    row.push_back(h.norm());
    if (reference_) {
      const double ref = reference_->evaluate(std::vector<double>{u});
      row.push_back(ref);
      row.push_back(ref != 0.0 ? std::abs(h.norm() - ref) / std::abs(ref) : std::abs(h.norm()));
    }
    if (separation_) {
      if (u > interval_.lo) {
        // The separation oracle works with coordinate velocities.
        const Vector dv0 = dh0_ - contract_gamma(ctx_.manifold->christoffel(x0_), h0_, u0_);
        const SeparationResult sep = two_geodesic_separation(*ctx_.manifold, x0_, u0_, h0_, dv0, u - interval_.lo,
                                                             delta_, ctx_.integrator.step);
        append(row, sep.value);
        row.push_back(sep.convergence);
        row.push_back((sep.value - h).norm());
      } else {
        append(row, h0_);
        row.push_back(0.0);
        row.push_back(0.0);
      }
    }
    return row;
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    return column_summary(columns(), rows, {"relative_error", "separation_convergence", "separation_discrepancy"});
  }

 private:
  TaskContext ctx_;
  Vector x0_, u0_, h0_, dh0_;
  Interval interval_;
  std::vector<double> samples_;
  std::optional<Expression> reference_;
  bool separation_ = false;
  double delta_ = 1e-4;
  std::shared_ptr<const IntegratedCurve> base_;
};

class MotionTask final : public PreparedTask {
 public:
  MotionTask(const cfg::Node& b, const TaskContext& ctx) : ctx_(ctx) {
    std::vector<std::string> keys{"s", "s_step", "residuals"};
    keys.insert(keys.end(), kFamilyKeys.begin(), kFamilyKeys.end());
    b.allow(keys);
    bundle_ = build_family(b, ctx);
    s_ = b.at("s").grid();
    s_step_ = cfg::positive_or(b, "s_step", 1e-2);
    residuals_ = residual_list(b, {"newtonian", "force_difference", "matrix_form", "quadrature"},
                               {"matrix_form", "quadrature"});
    const Interval& iv = bundle_.scn.s_range;
    require_in(b.at("s"), s_, {iv.lo + 2.0 * s_step_, iv.hi - 2.0 * s_step_},
               "s range shrunk by the second-derivative stencil");
    motion_.h_fd = ctx.integrator.fd_step;
    motion_.panels = panels_or(ctx, kMotionPanels);
    panels_ = panels_or(ctx, kDeviationPanels);
  }

  std::vector<std::string> columns() const override {
    const int n = ctx_.manifold->dim();
    std::vector<std::string> c{"s"};
    append(c, indexed("rhs", n));
    append(c, indexed("D2h", n));
    c.push_back("eom_residual");
    for (const auto& r : residuals_) {
      if (r == "newtonian") {
        append(c, indexed("force_jump", n));
        c.push_back("newtonian_residual");
      }
      if (r == "force_difference") c.push_back("force_difference_discrepancy");
      if (r == "matrix_form") c.push_back("matrix_form_discrepancy");
      if (r == "quadrature") c.push_back("quadrature_estimate");
    }
    return c;
  }
  std::size_t size() const override { return s_.size(); }
  std::string describe(std::size_t i) const override { return "s=" + num(s_[i]); }

  std::vector<double> evaluate(std::size_t i) const override {
    const double s = s_[i];
    const auto& scn = bundle_.scn;
    const auto force = family_force(bundle_.family);
    const Vector rhs = equation_of_motion_rhs(*ctx_.manifold, ctx_.law, scn, s, force, motion_);
    const Vector d2h = fd_second_deviation(scn, ctx_.law, s, s_step_, panels_);
    std::vector<double> row{s};
    append(row, rhs);
    append(row, d2h);
    row.push_back((rhs - d2h).norm());
    for (const auto& r : residuals_) {
      if (r == "newtonian") {
        const Vector jump = bundle_.family->force(s, bundle_.r2) - bundle_.family->force(s, bundle_.r1);
        append(row, jump);
        row.push_back((d2h - jump).norm());
      }
      if (r == "force_difference") {
        const auto fd = force_difference_term(*ctx_.manifold, ctx_.law, scn, s, force, motion_);
        row.push_back((fd.total - fd.direct).norm());
      }
      if (r == "matrix_form" || r == "quadrature") {
        const Vector h = deviation_vector(ctx_.law, scn, s, panels_).components;
        if (r == "matrix_form")
          row.push_back((h - deviation_vector_matrix_form(ctx_.law, scn, s, panels_).components).norm());
        else
          row.push_back(quadrature_estimate(ctx_.law, scn, s, panels_, h));
      }
    }
    return row;
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    json out = column_summary(columns(), rows,
                              {"eom_residual", "newtonian_residual", "force_difference_discrepancy",
                               "matrix_form_discrepancy", "quadrature_estimate"});
    out["motion_panels"] = motion_.panels;
    out["s_step"] = s_step_;
    return out;
  }

 private:
  TaskContext ctx_;
  ScenarioBundle bundle_;
  std::vector<double> s_;
  double s_step_ = 1e-2;
  std::vector<std::string> residuals_;
  MotionOptions motion_;
  int panels_ = kDeviationPanels;
};

// ---------------------------------------------------------------------------
// identity_check

class IdentityTask : public PreparedTask {
 public:
  explicit IdentityTask(const TaskContext& ctx) : ctx_(ctx) {}

  std::size_t size() const override { return steps_.size(); }
  std::string describe(std::size_t i) const override { return step_name_ + "=" + num(steps_[i]); }
  json evidence(const std::vector<std::vector<double>>& rows) const override {
    json out = order_evidence(rows, 0, 1);
    out["kind"] = kind_;
    return out;
  }

 protected:
  void read_steps(const cfg::Node& n) {
    steps_ = n.grid();
    for (double h : steps_)
      if (!(h > 0.0)) n.fail("steps must be positive");
  }

  TaskContext ctx_;
  std::string kind_;
  std::string step_name_ = "step";
  std::vector<double> steps_;
};

class BasicEquationCheck final : public IdentityTask {
 public:
  BasicEquationCheck(const cfg::Node& b, const TaskContext& ctx) : IdentityTask(ctx) {
    kind_ = "basic_equation";
    b.allow({"kind", "U", "xi", "point", "steps"});
    const int n = ctx.manifold->dim();
    const auto u = b.at("U").strings(static_cast<std::size_t>(n));
    const auto xi = b.at("xi").strings(static_cast<std::size_t>(n));
    u_ = at_path(b.at("U"), [&] { return make_expression_field(u); });
    xi_ = at_path(b.at("xi"), [&] { return make_expression_field(xi); });
    x_ = b.at("point").vector(n);
    if (!ctx.manifold->contains(x_)) b.at("point").fail("outside the chart domain");
    read_steps(b.at("steps"));
  }

  std::vector<std::string> columns() const override {
    std::vector<std::string> c{"step", "residual"};
    append(c, indexed("lhs", ctx_.manifold->dim()));
    return c;
  }

  std::vector<double> evaluate(std::size_t i) const override {
    const auto terms = basic_equation_terms(*ctx_.manifold, u_, xi_, x_, steps_[i]);
    std::vector<double> row{steps_[i], terms.residual};
    append(row, terms.lhs);
    return row;
  }

 private:
  VectorField u_, xi_;
  Vector x_;
};

class CongruenceDeviationCheck final : public IdentityTask {
 public:
  CongruenceDeviationCheck(const cfg::Node& b, const TaskContext& ctx) : IdentityTask(ctx) {
    kind_ = "congruence_deviation";
    b.allow({"kind", "congruence", "form", "f", "g", "u", "v1", "v2", "steps", "lambda_panels"});
    const int n = ctx.manifold->dim();
    const auto comps = b.at("congruence").strings(static_cast<std::size_t>(n));
    cong_ = std::make_shared<Congruence>(
        at_path(b.at("congruence"), [&] { return make_expression_congruence(comps, ctx.integrator.fd_step); }));
    opts_.form = b.at("form").choice({"both_geodesic", "v_geodesic"}) == "both_geodesic"
                     ? CongruenceForm::BothGeodesic
                     : CongruenceForm::VGeodesic;
    opts_.fd_step = ctx.integrator.fd_step;
    if (auto lp = b.find("lambda_panels")) {
      opts_.lambda_panels = lp->integer();
      if (opts_.lambda_panels < 2) lp->fail("must be at least 2");
    }
    f_ = factor(b, "f", true, nullptr);
    bool g_u = true;
    g_ = factor(b, "g", false, &g_u);
    opts_.g_depends_on_u = g_u;
    u_ = b.at("u").number();
    v1_ = b.at("v1").number();
    v2_ = b.at("v2").number();
    if (!(v1_ < v2_)) b.at("v2").fail("must exceed v1");
    read_steps(b.at("steps"));
    const double reach = 2.5 * *std::max_element(steps_.begin(), steps_.end());
    scn_ = make_congruence_scenario(*cong_, v1_, v2_, {u_ - reach, u_ + reach});
  }

  std::vector<std::string> columns() const override {
    const int n = ctx_.manifold->dim();
    std::vector<std::string> c{"step", "residual"};
    append(c, indexed("lhs", n));
    append(c, indexed("rhs", n));
    return c;
  }

  std::vector<double> evaluate(std::size_t i) const override {
    const Vector rhs = geodesic_deviation_rhs_general(*ctx_.manifold, *cong_, u_, v1_, v2_, f_, g_, opts_);
    const Vector lhs = fd_second_deviation(scn_, ctx_.law, u_, steps_[i], panels_or(ctx_, 0));
    std::vector<double> row{steps_[i], (lhs - rhs).norm()};
    append(row, lhs);
    append(row, rhs);
    return row;
  }

 private:
  SurfaceScalarFn factor(const cfg::Node& b, const char* key, bool along_u, bool* depends_on_u) {
    if (!b.has(key)) {
      if (along_u && opts_.form == CongruenceForm::VGeodesic) return [](double, double) { return 0.0; };
      b.at(key);
    }
    const cfg::Node n = b.at(key);
    if (n.is_string() && n.text() == "numeric") {
      auto m = ctx_.manifold;
      auto cong = cong_;
      const double fd = ctx_.integrator.fd_step;
      return [m, cong, along_u, fd](double u, double v) {
        return congruence_geodesic_factor(*m, *cong, u, v, along_u, fd);
      };
    }
    const Expression e = compile_scalar(n, {"u", "v"});
    if (depends_on_u) {
      const Expression du = e.derivative(0);
      *depends_on_u = !(du.is_constant() && du.evaluate(std::vector<double>{0.0, 0.0}) == 0.0);
    }
    return [e](double u, double v) { return e.evaluate(std::vector<double>{u, v}); };
  }

  std::shared_ptr<const Congruence> cong_;
  DeviationRhsOptions opts_;
  SurfaceScalarFn f_, g_;
  double u_ = 0.0, v1_ = 0.0, v2_ = 1.0;
  DeviationScenario scn_;
};

class LambdaFactorCheck final : public IdentityTask {
 public:
  LambdaFactorCheck(const cfg::Node& b, const TaskContext& ctx) : IdentityTask(ctx) {
    kind_ = "lambda_factor";
    step_name_ = "c";
    b.allow({"kind", "c", "v1", "v2", "panels"});
    steps_ = b.at("c").grid();
    v1_ = b.at("v1").number();
    v2_ = b.at("v2").number();
    if (!(v1_ < v2_)) b.at("v2").fail("must exceed v1");
    if (auto p = b.find("panels")) {
      panels_ = p->integer();
      if (panels_ < 2) p->fail("must be at least 2");
    }
  }

  std::vector<std::string> columns() const override { return {"c", "lambda", "closed_form", "residual"}; }

  std::vector<double> evaluate(std::size_t i) const override {
    const double c = steps_[i];
    const double len = v2_ - v1_;
    const double lam = lambda_factor([c](double, double) { return c; }, 0.0, v1_, v2_, panels_, false).lambda;
    const double exact = c == 0.0 ? len : std::expm1(c * len) / c;
    return {c, lam, exact, std::abs(lam - exact)};
  }

  json evidence(const std::vector<std::vector<double>>& rows) const override {
    json out = column_summary(columns(), rows, {"residual"});
    out["kind"] = kind_;
    out["panels"] = panels_;
    return out;
  }

 private:
  double v1_ = 0.0, v2_ = 1.0;
  int panels_ = 256;
};

class InfinitesimalDisplacementCheck final : public IdentityTask {
 public:
  InfinitesimalDisplacementCheck(const cfg::Node& b, const TaskContext& ctx) : IdentityTask(ctx) {
    kind_ = "infinitesimal_displacement";
    step_name_ = "dt";
    b.allow({"kind", "curve", "s", "steps"});
    curve_ = parse_curve(b.at("curve"), ctx, "curve");
    s_ = b.at("s").number();
    read_steps(b.at("steps"));
    std::vector<double> ends{s_};
    for (double h : steps_) ends.push_back(s_ + h);
    require_in(b.at("steps"), ends, curve_->interval(), "curve interval (s + step)");
  }

  std::vector<std::string> columns() const override { return {"dt", "residual"}; }

  std::vector<double> evaluate(std::size_t i) const override {
    const double dt = steps_[i];
    const auto d = displacement_vector(ctx_.law, *curve_, s_, s_ + dt, ctx_.integrator.quad_panels);
    const auto z = infinitesimal_displacement(*curve_, s_, s_ + dt);
    return {dt, (d.vector.components - z.components).norm()};
  }

 private:
  CurvePtr curve_;
  double s_ = 0.0;
};

class InfinitesimalDeviationCheck final : public IdentityTask {
 public:
  InfinitesimalDeviationCheck(const cfg::Node& b, const TaskContext& ctx) : IdentityTask(ctx) {
    kind_ = "infinitesimal_deviation";
    variant_ = b.at("variant").choice({"observer_offset", "connector_span", "equation"});
    if (variant_ == "equation") {
      b.allow({"kind", "variant", "family", "r1", "s", "s_step", "steps"});
      family_ = parse_family(b.at("family"), ctx);
      r1_ = b.at("r1").number();
      s_step_ = cfg::positive_or(b, "s_step", 2e-3);
      step_name_ = "dr";
    } else {
      b.allow({"kind", "variant", "x1", "x2", "offset", "direction", "s", "steps"});
      x1_ = parse_curve(b.at("x1"), ctx, "x1");
      if (variant_ == "observer_offset") {
        x2_ = parse_curve(b.at("x2"), ctx, "x2");
        offset_ = b.at("offset").vector(ctx.manifold->dim());
        step_name_ = "dt";
      } else {
        offset_ = b.at("direction").vector(ctx.manifold->dim());
        step_name_ = "dr";
      }
    }
    s_ = b.at("s").number();
    read_steps(b.at("steps"));
    if (family_) {
      for (double h : steps_)
        if (!family_->r_range().contains(r1_ + h, 0.0)) b.at("steps").fail("r1 + step leaves family.r_range");
      const Interval& iv = family_->s_range();
      require_in(b.at("s"), {s_}, {iv.lo + 2.0 * s_step_, iv.hi - 2.0 * s_step_},
                 "family s range shrunk by the second-derivative stencil");
    } else {
      require_in(b.at("s"), {s_}, x1_->interval(), "x1 interval");
    }
  }

  std::vector<std::string> columns() const override { return {step_name_, "residual"}; }

  std::vector<double> evaluate(std::size_t i) const override {
    const double eps = steps_[i];
    const int panels = panels_or(ctx_, kDeviationPanels);
    if (family_) {
      const DeviationScenario scn = make_forced_family_scenario(family_, r1_, r1_ + eps, ObserverSpec{});
      MotionOptions mo;
      mo.h_fd = ctx_.integrator.fd_step;
      mo.panels = panels_or(ctx_, kMotionPanels);
      const auto res =
          infinitesimal_deviation_equation_residual(*ctx_.manifold, ctx_.law, scn, s_, family_force(family_),
                                                    s_step_, mo);
      return {eps, res.residual};
    }
    ConnectorOptions opts;
    opts.shooting.step = std::min(opts.shooting.step, ctx_.integrator.step);
    DeviationScenario scn;
    const Interval iv = x1_->interval();
    if (variant_ == "observer_offset") {
      opts.gamma = ConnectorKind::Geodesic;
      opts.eta = ConnectorKind::Segment;
      opts.eta_span = eps;
      const CurvePtr x = shifted(x1_, eps * offset_, "observer");
      scn = make_connector_scenario(ctx_.manifold, x1_, x2_, x, overlap(iv, x2_->interval()), opts, false);
    } else {
      opts.gamma = ConnectorKind::Segment;
      opts.gamma_span = eps;
      const CurvePtr x2 = shifted(x1_, eps * offset_, "x2");
      scn = make_connector_scenario(ctx_.manifold, x1_, x2, x1_, iv, opts, true);
    }
    const Vector h = deviation_vector(ctx_.law, scn, s_, panels).components;
    return {eps, (h - infinitesimal_deviation(scn, s_).components).norm()};
  }

 private:
  std::string variant_;
  CurvePtr x1_, x2_;
  Vector offset_;
  std::shared_ptr<const ForcedFamily> family_;
  double r1_ = 0.0;
  double s_ = 0.0;
  double s_step_ = 2e-3;
};

std::shared_ptr<const PreparedTask> build_identity(const cfg::Node& b, const TaskContext& ctx) {
  const std::string kind = b.at("kind").choice({"basic_equation", "congruence_deviation", "lambda_factor",
                                                "infinitesimal_displacement", "infinitesimal_deviation"});
  if (kind == "basic_equation") return std::make_shared<BasicEquationCheck>(b, ctx);
  if (kind == "congruence_deviation") return std::make_shared<CongruenceDeviationCheck>(b, ctx);
  if (kind == "lambda_factor") return std::make_shared<LambdaFactorCheck>(b, ctx);
  if (kind == "infinitesimal_displacement") return std::make_shared<InfinitesimalDisplacementCheck>(b, ctx);
  return std::make_shared<InfinitesimalDeviationCheck>(b, ctx);
}

}  // namespace

CurvePtr parse_curve(const cfg::Node& n, const TaskContext& ctx, const std::string& id) {
  const std::string type = n.at("type").choice({"expression", "segment", "point", "geodesic", "forced", "shot"});
  const int dim = ctx.manifold->dim();
  const Manifold& m = *ctx.manifold;
  if (type == "expression") {
    n.allow({"type", "components", "interval", "parameter"});
    const std::string param = n.has("parameter") ? n.at("parameter").text() : "t";
    const auto comps = n.at("components").strings(static_cast<std::size_t>(dim));
    const Interval iv = n.at("interval").interval();
    return at_path(n.at("components"), [&] { return make_expression_curve(id, comps, iv, param); });
  }
  if (type == "segment") {
    n.allow({"type", "from", "to"});
    return make_segment(id, n.at("from").vector(dim), n.at("to").vector(dim));
  }
  if (type == "point") {
    n.allow({"type", "at", "interval"});
    return make_point_curve(id, n.at("at").vector(dim), n.at("interval").interval());
  }
  if (type == "shot") {
    n.allow({"type", "from", "to"});
    ShootingOptions opts;
    opts.step = std::min(opts.step, ctx.integrator.step);
    const Vector a = n.at("from").vector(dim), b = n.at("to").vector(dim);
    return at_path(n, [&] { return CurvePtr(shoot_geodesic(m, a, b, opts, id)); });
  }
  const Vector x0 = n.at("x0").vector(dim);
  const Vector u0 = n.at("u0").vector(dim);
  if (type == "geodesic") {
    n.allow({"type", "x0", "u0", "interval"});
    const Interval iv = n.at("interval").interval();
    return at_path(n, [&] { return CurvePtr(integrate_geodesic(m, x0, u0, iv, {}, ctx.integrator.step, id)); });
  }
  n.allow({"type", "x0", "u0", "interval", "force"});
  const Interval iv = n.at("interval").interval();
  const ExprVector force = compile(n.at("force"), static_cast<std::size_t>(dim), state_vars({"s"}, dim));
  const ForceFn fn = [force](double s, const Vector& x, const Vector& u) { return force(state_args({s}, x, u)); };
  return at_path(n, [&] { return CurvePtr(integrate_forced(m, x0, u0, fn, iv, ctx.integrator.step, id)); });
}

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"transport", "displacement", "deviation",
                                              "jacobi",    "equation_of_motion", "identity_check"};
  return names;
}

std::string task_summary(const std::string& task) {
  if (task == "transport") return "transport matrix or transported vector along a curve over a target grid";
  if (task == "displacement") return "displacement vector over an (s, t[, r]) grid with optional residuals";
  if (task == "deviation") return "deviation vector for connector, congruence or forced-family scenarios";
  if (task == "jacobi") return "geodesic deviation (Jacobi) field along a geodesic, with optional oracles";
  if (task == "equation_of_motion") return "deviation equation right-hand side against finite differences";
  if (task == "identity_check") return "residual of an identity over a step grid, with fitted order";
  return {};
}

std::shared_ptr<const PreparedTask> build_task(const std::string& task, const cfg::Node& block,
                                               const TaskContext& ctx) {
  if (task == "transport") return std::make_shared<TransportTask>(block, ctx);
  if (task == "displacement") return std::make_shared<DisplacementTask>(block, ctx);
  if (task == "deviation") return std::make_shared<DeviationTask>(block, ctx);
  if (task == "jacobi") return std::make_shared<JacobiTask>(block, ctx);
  if (task == "equation_of_motion") return std::make_shared<MotionTask>(block, ctx);
  if (task == "identity_check") return build_identity(block, ctx);
  block.fail("unknown task '" + task + "'");
}

}  // namespace pathdev
