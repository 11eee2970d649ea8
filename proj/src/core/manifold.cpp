#include "pathdev/manifold.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace pathdev {

Manifold::Manifold(std::string name, int dim, CoefficientFn gamma, DomainFn domain, CoefficientFn derivative)
    : name_(std::move(name)),
      dim_(dim),
      gamma_(std::move(gamma)),
      domain_(std::move(domain)),
      derivative_(std::move(derivative)) {
  if (dim_ < 1) throw Error(ErrorKind::Argument, "manifold '" + name_ + "': dimension must be >= 1");
  if (!gamma_) throw Error(ErrorKind::Argument, "manifold '" + name_ + "': missing connection coefficients");
  if (!domain_) domain_ = [](const Vector&) { return true; };
}

bool Manifold::contains(const Vector& x) const {
  if (x.size() != dim_) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i])) return false;
  return domain_(x);
}

void Manifold::require_inside(const Vector& x, const char* what) const {
  if (x.size() != dim_)
    throw Error(ErrorKind::Argument, std::string(what) + ": point has " + std::to_string(x.size()) +
                                         " components, manifold '" + name_ + "' has dimension " +
                                         std::to_string(dim_));
  if (!contains(x)) {
    std::ostringstream os;
    os << what << ": point (" << x.transpose() << ") is outside the chart domain of '" << name_ << "'";
    throw DomainError(os.str());
  }
}

Tensor Manifold::christoffel(const Vector& x) const {
  require_inside(x, "christoffel");
  Tensor g = gamma_(x);
  if (g.dim() != dim_ || g.rank() != 3)
    throw Error(ErrorKind::Numerical, "manifold '" + name_ + "': coefficient array has wrong shape");
  for (double v : g.data())
    if (!std::isfinite(v)) throw Error(ErrorKind::Numerical, "manifold '" + name_ + "': non-finite coefficient");
  return g;
}

Tensor Manifold::christoffel_derivative(const Vector& x, double fd_step, bool force_finite_difference) const {
  require_inside(x, "christoffel_derivative");
  const int n = dim_;
  Tensor d(n, 4);
  if (derivative_ && !force_finite_difference) {
    d = derivative_(x);
    if (d.dim() != n || d.rank() != 4)
      throw Error(ErrorKind::Numerical, "manifold '" + name_ + "': derivative array has wrong shape");
    return d;
  }
  if (!(fd_step > 0.0)) throw Error(ErrorKind::Argument, "christoffel_derivative: step must be positive");
  for (int l = 0; l < n; ++l) {
    Vector xp = x, xm = x;
    xp[l] += fd_step;
    xm[l] -= fd_step;
    if (!contains(xp) || !contains(xm)) {
      std::ostringstream os;
      os << "christoffel_derivative: stencil of step " << fd_step << " around (" << x.transpose()
         << ") leaves the domain of '" << name_ << "'";
      throw StencilError(os.str());
    }
    const Tensor gp = gamma_(xp);
    const Tensor gm = gamma_(xm);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) d(i, j, k, l) = (gp(i, j, k) - gm(i, j, k)) / (2.0 * fd_step);
  }
  return d;
}

ManifoldPtr make_expression_manifold(const ExpressionConnection& table) {
  const int n = table.dim;
  if (n < 1) throw Error(ErrorKind::Config, "expression connection '" + table.name + "': dim must be >= 1");
  struct Compiled {
    int i, j, k;
    Expression value;
    std::vector<Expression> grad;
  };
  auto entries = std::make_shared<std::vector<Compiled>>();
  for (const auto& e : table.entries) {
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n || e.k < 0 || e.k >= n)
      throw Error(ErrorKind::Config, "expression connection '" + table.name + "': index out of range");
    Compiled c{e.i, e.j, e.k, Expression::parse_coordinates(e.expression, n), {}};
    for (int l = 0; l < n; ++l) c.grad.push_back(c.value.derivative(static_cast<std::size_t>(l)));
    entries->push_back(std::move(c));
  }
  auto gamma = [entries, n](const Vector& x) {
    Tensor g(n, 3);
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (const auto& c : *entries) g(c.i, c.j, c.k) += c.value(xs);
    return g;
  };
  auto derivative = [entries, n](const Vector& x) {
    Tensor d(n, 4);
    std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    for (const auto& c : *entries)
      for (int l = 0; l < n; ++l) d(c.i, c.j, c.k, l) += c.grad[static_cast<std::size_t>(l)](xs);
    return d;
  };
  DomainFn domain;
  if (table.lower || table.upper) {
    auto lo = table.lower.value_or(std::vector<double>(static_cast<std::size_t>(n), -HUGE_VAL));
    auto hi = table.upper.value_or(std::vector<double>(static_cast<std::size_t>(n), HUGE_VAL));
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n)
      throw Error(ErrorKind::Config, "expression connection '" + table.name + "': domain bounds need " +
                                         std::to_string(n) + " entries");
    domain = [lo, hi](const Vector& x) {
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (!(x[i] > lo[ui] && x[i] < hi[ui])) return false;
      }
      return true;
    };
  }
  return std::make_shared<Manifold>(table.name, n, gamma, domain, derivative);
}

const std::vector<CatalogEntry>& manifold_catalog() {
  static const std::vector<CatalogEntry> catalog{
      {"euclidean:<n>", 0, {"n"}, "R^n in Cartesian coordinates, zero connection"},
      {"euclidean2_polar", 2, {}, "Euclidean plane in polar coordinates (r, theta), r > margin"},
      {"sphere2:<radius>", 2, {"radius"}, "Levi-Civita connection of the round sphere in (theta, phi)"},
      {"hyperbolic2", 2, {}, "Poincare upper half plane (x, y), y > margin"},
      {"flat_torsion:<c>", 2, {"c"}, "curvature-free connection with Gamma^1_12 = c, all other entries zero"},
  };
  return catalog;
}

namespace {

double parse_param(const std::string& spec, const std::string& text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw Error(ErrorKind::Config, "manifold '" + spec + "': parameter '" + text + "' is not a number");
  return v;
}

std::string catalog_names() {
  std::string out;
  for (const auto& e : manifold_catalog()) {
    if (!out.empty()) out += ", ";
    out += e.name;
  }
  return out;
}

}  // namespace

ManifoldPtr make_manifold(const std::string& spec, double margin) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const bool has_param = colon != std::string::npos;
  const std::string param = has_param ? spec.substr(colon + 1) : std::string();

  auto need_param = [&](bool want) {
    if (want != has_param)
      throw Error(ErrorKind::Config, "manifold '" + spec + "': " + (want ? "missing" : "unexpected") +
                                         " parameter; known manifolds: " + catalog_names());
  };

  if (head == "euclidean") {
    need_param(true);
    const double nd = parse_param(spec, param);
    if (nd < 1 || nd != std::floor(nd) || nd > 16)
      throw Error(ErrorKind::Config, "manifold '" + spec + "': dimension must be an integer in [1, 16]");
    const int n = static_cast<int>(nd);
    return std::make_shared<Manifold>(
        spec, n, [n](const Vector&) { return Tensor(n, 3); }, nullptr);
  }
  if (head == "euclidean2_polar") {
    need_param(false);
    return std::make_shared<Manifold>(
        spec, 2,
        [](const Vector& x) {
          Tensor g(2, 3);
          const double r = x[0];
          g(0, 1, 1) = -r;
          g(1, 0, 1) = 1.0 / r;
          g(1, 1, 0) = 1.0 / r;
          return g;
        },
        [margin](const Vector& x) { return x[0] > margin; });
  }
  if (head == "sphere2") {
    need_param(true);
    const double radius = parse_param(spec, param);
    if (!(radius > 0.0)) throw Error(ErrorKind::Config, "manifold '" + spec + "': radius must be positive");
    return std::make_shared<Manifold>(
        spec, 2,
        [](const Vector& x) {
          Tensor g(2, 3);
          const double s = std::sin(x[0]);
          const double c = std::cos(x[0]);
          g(0, 1, 1) = -s * c;
          g(1, 0, 1) = c / s;
          g(1, 1, 0) = c / s;
          return g;
        },
        [margin](const Vector& x) { return x[0] > margin && x[0] < std::numbers::pi - margin; });
  }
  if (head == "hyperbolic2") {
    need_param(false);
    return std::make_shared<Manifold>(
        spec, 2,
        [](const Vector& x) {
          Tensor g(2, 3);
          const double inv = 1.0 / x[1];
          g(0, 0, 1) = -inv;
          g(0, 1, 0) = -inv;
          g(1, 0, 0) = inv;
          g(1, 1, 1) = -inv;
          return g;
        },
        [margin](const Vector& x) { return x[1] > margin; });
  }
  if (head == "flat_torsion") {
    need_param(true);
    const double c = parse_param(spec, param);
    return std::make_shared<Manifold>(
        spec, 2,
        [c](const Vector&) {
          Tensor g(2, 3);
          g(0, 0, 1) = c;
          return g;
        },
        nullptr);
  }
  throw Error(ErrorKind::Config, "unknown manifold '" + spec + "'; known manifolds: " + catalog_names());
}

}  // namespace pathdev
