#pragma once

#include "pathdev/deviation.hpp"
#include "pathdev/runner.hpp"

#include <nlohmann/json.hpp>

#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace pathdev {

using json = nlohmann::json;

namespace cfg {

// Read-only view of a config subtree that remembers where it came from.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *value_; }

  bool has(const std::string& key) const;
  Node at(const std::string& key) const;
  std::optional<Node> find(const std::string& key) const;
  Node item(std::size_t i) const;
  std::size_t size() const;

  bool is_map() const { return value_->is_object(); }
  bool is_list() const { return value_->is_array(); }
  bool is_string() const { return value_->is_string(); }

  /// Rejects keys outside `allowed`.
  void allow(std::initializer_list<const char*> allowed) const;
  void allow(const std::vector<std::string>& allowed) const;

  /// Numbers may also be written as constant expressions, e.g. "pi/3".
  double number() const;
  double positive() const;
  int integer() const;
  bool boolean() const;
  std::string text() const;
  /// One of `choices`; the error lists them.
  std::string choice(std::initializer_list<const char*> choices) const;
  Vector vector(int dim) const;
  std::vector<std::string> strings(std::size_t count) const;
  std::vector<std::string> string_list() const;
  /// A list of numbers or {from, to, count}.
  std::vector<double> grid() const;
  Interval interval() const;

  [[noreturn]] void fail(const std::string& message) const;

 private:
  const json* value_;
  std::string path_;
};

double number_or(const Node& parent, const std::string& key, double fallback);
double positive_or(const Node& parent, const std::string& key, double fallback);

}  // namespace cfg

struct TaskContext {
  ManifoldPtr manifold;
  TransportLaw law;
  IntegratorSettings integrator;
};

class PreparedTask {
 public:
  virtual ~PreparedTask() = default;
  virtual std::vector<std::string> columns() const = 0;
  virtual std::size_t size() const = 0;
  /// Grid coordinates of point i, for error messages.
  virtual std::string describe(std::size_t i) const = 0;
  virtual std::vector<double> evaluate(std::size_t i) const = 0;
  /// Summary attached to the sidecar; may run extra checks.
  virtual json evidence(const std::vector<std::vector<double>>& rows) const = 0;
};

std::shared_ptr<const PreparedTask> build_task(const std::string& task, const cfg::Node& block,
                                               const TaskContext& ctx);

/// Task names in catalog order.
const std::vector<std::string>& task_names();
std::string task_summary(const std::string& task);

CurvePtr parse_curve(const cfg::Node& node, const TaskContext& ctx, const std::string& id);

}  // namespace pathdev
