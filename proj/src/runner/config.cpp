#include "detail.hpp"

#include <yaml-cpp/yaml.h>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pathdev {
namespace cfg {

namespace {

std::string child_path(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

const char* type_name(const json& v) {
  if (v.is_object()) return "a table";
  if (v.is_array()) return "a list";
  if (v.is_string()) return "a string";
  if (v.is_boolean()) return "a boolean";
  if (v.is_null()) return "empty";
  return "a number";
}

}  // namespace

void Node::fail(const std::string& message) const {
  throw Error(ErrorKind::Config, (path_.empty() ? std::string("config") : path_) + ": " + message);
}

bool Node::has(const std::string& key) const { return value_->is_object() && value_->contains(key); }

Node Node::at(const std::string& key) const {
  if (!value_->is_object()) fail(std::string("expected a table, found ") + type_name(*value_));
  auto it = value_->find(key);
  if (it == value_->end()) throw Error(ErrorKind::Config, child_path(path_, key) + ": required key is missing");
  return Node(*it, child_path(path_, key));
}

std::optional<Node> Node::find(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return at(key);
}

Node Node::item(std::size_t i) const {
  if (!value_->is_array()) fail(std::string("expected a list, found ") + type_name(*value_));
  return Node((*value_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Node::size() const {
  if (!value_->is_array()) fail(std::string("expected a list, found ") + type_name(*value_));
  return value_->size();
}

void Node::allow(std::initializer_list<const char*> allowed) const {
  allow(std::vector<std::string>(allowed.begin(), allowed.end()));
}

void Node::allow(const std::vector<std::string>& allowed) const {
  if (!value_->is_object()) fail(std::string("expected a table, found ") + type_name(*value_));
  for (const auto& [key, value] : value_->items()) {
    bool ok = false;
    for (const auto& a : allowed) ok = ok || key == a;
    if (ok) continue;
    std::string list;
    for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
    throw Error(ErrorKind::Config, child_path(path_, key) + ": unknown key (allowed here: " + list + ")");
  }
}

double Node::number() const {
  if (value_->is_number()) return value_->get<double>();
  if (value_->is_string()) {
    try {
      const Expression e = Expression::parse(value_->get<std::string>(), {});
      const double v = e.evaluate({});
      if (!std::isfinite(v)) fail("constant expression is not finite");
      return v;
    } catch (const ParseError& e) {
      throw Error(ErrorKind::Parse, path_ + ": " + e.what());
    }
  }
  fail(std::string("expected a number, found ") + type_name(*value_));
}

double Node::positive() const {
  const double v = number();
  if (!(v > 0.0)) fail("must be positive");
  return v;
}

int Node::integer() const {
  const double v = number();
  if (v != std::floor(v) || std::abs(v) > 1e9) fail("expected an integer");
  return static_cast<int>(v);
}

bool Node::boolean() const {
  if (!value_->is_boolean()) fail(std::string("expected true or false, found ") + type_name(*value_));
  return value_->get<bool>();
}

std::string Node::text() const {
  if (!value_->is_string()) fail(std::string("expected a string, found ") + type_name(*value_));
  return value_->get<std::string>();
}

std::string Node::choice(std::initializer_list<const char*> choices) const {
  const std::string v = text();
  std::string list;
  for (const char* c : choices) {
    if (v == c) return v;
    list += (list.empty() ? "" : ", ") + std::string(c);
  }
  fail("'" + v + "' is not one of: " + list);
}

Vector Node::vector(int dim) const {
  const std::size_t n = size();
  if (dim > 0 && n != static_cast<std::size_t>(dim))
    fail("expected " + std::to_string(dim) + " components, found " + std::to_string(n));
  Vector v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = item(i).number();
  return v;
}

std::vector<std::string> Node::strings(std::size_t count) const {
  auto out = string_list();
  if (out.size() != count)
    fail("expected " + std::to_string(count) + " entries, found " + std::to_string(out.size()));
  return out;
}

std::vector<std::string> Node::string_list() const {
  std::vector<std::string> out;
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const Node e = item(i);
    // Plain numbers in an expression list are fine.
    if (e.raw().is_number()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.raw().get<double>());
      out.emplace_back(buf);
    } else {
      out.push_back(e.text());
    }
  }
  return out;
}

std::vector<double> Node::grid() const {
  std::vector<double> out;
  if (value_->is_array()) {
    for (std::size_t i = 0; i < size(); ++i) out.push_back(item(i).number());
  } else if (value_->is_object()) {
    allow({"from", "to", "count"});
    const double from = at("from").number();
    const double to = at("to").number();
    const int count = at("count").integer();
    if (count < 1) at("count").fail("must be at least 1");
    if (count == 1) return {from};
    for (int i = 0; i < count; ++i)
      out.push_back(i == count - 1 ? to : from + (to - from) * static_cast<double>(i) / (count - 1));
  } else {
    out.push_back(number());
  }
  if (out.empty()) fail("grid is empty");
  return out;
}

Interval Node::interval() const {
  const Vector v = vector(2);
  if (!(v[0] < v[1])) fail("interval must satisfy lo < hi");
  return {v[0], v[1]};
}

double number_or(const Node& parent, const std::string& key, double fallback) {
  auto n = parent.find(key);
  return n ? n->number() : fallback;
}

double positive_or(const Node& parent, const std::string& key, double fallback) {
  auto n = parent.find(key);
  return n ? n->positive() : fallback;
}

}  // namespace cfg

namespace {

json scalar_to_json(const YAML::Node& n) {
  const std::string& s = n.Scalar();
  if (n.Tag() == "!") return s;
  if (s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "false" || s == "False" || s == "FALSE") return false;
  if (s.empty() || s == "~" || s == "null" || s == "Null" || s == "NULL") return nullptr;
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end != begin && *end == '\0' && errno == 0 && std::isfinite(v)) {
    const bool integral = s.find_first_of(".eE") == std::string::npos;
    if (integral && std::abs(v) < 9e15) return static_cast<std::int64_t>(v);
    return v;
  }
  return s;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& e : n) arr.push_back(yaml_to_json(e));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (obj.contains(key))
          throw Error(ErrorKind::Config, "duplicate key '" + key + "' at line " +
                                             std::to_string(kv.first.Mark().line + 1));
        obj[key] = yaml_to_json(kv.second);
      }
      return obj;
    }
  }
  return nullptr;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ManifoldPtr builtin_manifold(const cfg::Node& where, const std::string& spec, double margin) {
  try {
    return make_manifold(spec, margin);
  } catch (const Error& e) {
    where.fail(e.what());
  }
}

ManifoldPtr parse_manifold(const cfg::Node& n, std::string& label) {
  if (n.is_string()) {
    label = n.text();
    return builtin_manifold(n, label, 1e-3);
  }
  n.allow({"name", "margin", "dim", "christoffel", "domain"});
  if (!n.has("christoffel")) {
    label = n.at("name").text();
    return builtin_manifold(n, label, cfg::positive_or(n, "margin", 1e-3));
  }
  ExpressionConnection table;
  table.name = n.has("name") ? n.at("name").text() : "custom";
  label = table.name;
  table.dim = n.at("dim").integer();
  if (table.dim < 1 || table.dim > 16) n.at("dim").fail("must be an integer in [1, 16]");
  const cfg::Node entries = n.at("christoffel");
  for (std::size_t e = 0; e < entries.size(); ++e) {
    const cfg::Node entry = entries.item(e);
    entry.allow({"index", "expression"});
    const cfg::Node idx = entry.at("index");
    if (idx.size() != 3) idx.fail("expected three indices [i, j, k]");
    ExpressionConnection::Entry out;
    int* slots[3] = {&out.i, &out.j, &out.k};
    for (std::size_t s = 0; s < 3; ++s) {
      const int v = idx.item(s).integer();
      if (v < 1 || v > table.dim) idx.item(s).fail("index must lie in 1.." + std::to_string(table.dim));
      *slots[s] = v - 1;
    }
    const cfg::Node ex = entry.at("expression");
    out.expression = ex.raw().is_number() ? ex.raw().dump() : ex.text();
    table.entries.push_back(out);
  }
  if (auto d = n.find("domain")) {
    d->allow({"lower", "upper"});
    if (auto lo = d->find("lower")) {
      const Vector v = lo->vector(table.dim);
      table.lower = std::vector<double>(v.data(), v.data() + v.size());
    }
    if (auto hi = d->find("upper")) {
      const Vector v = hi->vector(table.dim);
      table.upper = std::vector<double>(v.data(), v.data() + v.size());
    }
  }
  try {
    return make_expression_manifold(table);
  } catch (const ParseError& e) {
    throw Error(ErrorKind::Parse, entries.path() + ": " + e.what());
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

std::string stem_of(const std::string& origin) {
  const std::string stem = std::filesystem::path(origin).stem().string();
  return stem.empty() || stem[0] == '<' ? "scenario" : stem;
}

}  // namespace

std::size_t ScenarioConfig::grid_size() const { return prepared ? prepared->size() : 0; }

std::vector<std::string> ScenarioConfig::columns() const {
  return prepared ? prepared->columns() : std::vector<std::string>{};
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin, const ConfigOverrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::Parse, origin + ":" + std::to_string(e.mark.line + 1) + ":" +
                                      std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  json doc = yaml_to_json(root);
  if (!doc.is_object()) throw Error(ErrorKind::Config, origin + ": top level must be a table");

  if (overrides.step || overrides.quad_panels || overrides.fd_step) {
    json& integ = doc["integrator"];
    if (integ.is_null()) integ = json::object();
    if (!integ.is_object()) throw Error(ErrorKind::Config, "integrator: expected a table");
    if (overrides.step) integ["step"] = *overrides.step;
    if (overrides.quad_panels) integ["quad_panels"] = *overrides.quad_panels;
    if (overrides.fd_step) integ["fd_step"] = *overrides.fd_step;
  }

  const cfg::Node top(doc, "");
  ScenarioConfig out;
  out.origin = origin;

  out.task = top.at("task").text();
  bool known = false;
  std::string list;
  for (const auto& t : task_names()) {
    known = known || t == out.task;
    list += (list.empty() ? "" : ", ") + t;
  }
  if (!known) top.at("task").fail("unknown task '" + out.task + "' (tasks: " + list + ")");
  for (const auto& [key, value] : doc.items()) {
    static const char* fixed[] = {"name", "description", "manifold", "transport", "integrator", "task", "params", "output"};
    bool ok = false;
    for (const char* f : fixed) ok = ok || key == f;
    if (!ok)
      throw Error(ErrorKind::Config, key + ": unknown key (allowed at top level: name, description, manifold, "
                                           "transport, integrator, task, params, output)");
  }

  out.name = top.has("name") ? top.at("name").text() : stem_of(origin);
  if (top.has("description")) top.at("description").text();

  out.manifold = parse_manifold(top.at("manifold"), out.manifold_name);

  if (auto t = top.find("transport"))
    out.transport = t->choice({"parallel", "euclidean"}) == "parallel" ? TransportKind::Parallel
                                                                        : TransportKind::Euclidean;
  if (auto integ = top.find("integrator")) {
    integ->allow({"step", "quad_panels", "fd_step"});
    out.integrator.step = cfg::positive_or(*integ, "step", out.integrator.step);
    out.integrator.fd_step = cfg::positive_or(*integ, "fd_step", out.integrator.fd_step);
    if (auto q = integ->find("quad_panels")) {
      out.integrator.quad_panels = q->integer();
      if (out.integrator.quad_panels < 0) q->fail("must be >= 0 (0 selects the task default)");
    }
  }

  out.output_path = out.name;
  if (auto o = top.find("output")) {
    o->allow({"path", "format"});
    if (auto p = o->find("path")) out.output_path = p->text();
    if (auto f = o->find("format")) out.output_format = f->choice({"csv"});
  }
  if (out.output_path.empty()) top.at("output").at("path").fail("must not be empty");

  const TransportLaw law = out.transport == TransportKind::Parallel
                               ? TransportLaw::parallel(out.manifold, out.integrator.step)
                               : TransportLaw::euclidean(out.integrator.step);
  const TaskContext ctx{out.manifold, law, out.integrator};
  out.prepared = build_task(out.task, top.at("params"), ctx);

  out.canonical = doc.dump();
  out.hash = fnv1a_hex(out.canonical);
  return out;
}

ScenarioConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, overrides);
}

}  // namespace pathdev
