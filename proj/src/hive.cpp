#include "hivelab/hive.hpp"

#include <algorithm>
#include <cmath>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"

namespace hivelab {

namespace {

struct AnalyticImpl : ContinuumHive::Impl {
  std::function<double(double, double)> f;
  double eval(double x, double y) const override { return f(x, y); }
};

struct PiecewiseLinearImpl : ContinuumHive::Impl {
  int m = 1;
  TriangleField field;

  double eval(double x, double y) const override {
    double X = std::clamp(x, 0.0, 1.0) * m;
    double Y = std::clamp(y, 0.0, 1.0) * m;
    X = std::min(X, Y);
    const int i = std::min(static_cast<int>(X), m - 1);
    const int j = std::min(static_cast<int>(Y), m - 1);
    const double fx = X - i, fy = Y - j;
    const double f00 = field({i, j}), f11 = field({i + 1, j + 1});
    if (fx <= fy) {
      const double f01 = field({i, j + 1});
      return f00 + fy * (f01 - f00) + fx * (f11 - f01);
    }
    const double f10 = field({i + 1, j});
    return f00 + fx * (f10 - f00) + fy * (f11 - f10);
  }
  int breakpoint_resolution() const override { return m; }
};

double kernel_1d(double t) {
  if (t < 0.0 || t > 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 630.0 * u * u * u * u;
}

// Points of o + k/m strictly inside (a, b).
void add_lattice_breaks(std::vector<double>& out, double a, double b, double offset, int m) {
  const long k0 = static_cast<long>(std::ceil((a - offset) * m));
  const long k1 = static_cast<long>(std::floor((b - offset) * m));
  for (long k = k0; k <= k1; ++k) out.push_back(offset + static_cast<double>(k) / m);
}

struct MollifiedImpl : ContinuumHive::Impl {
  ContinuumHive input;
  double eps = 0.0;
  int points = 30;
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // affine correction c0 + c1 x + c2 y

  double convolve(double px, double py) const {
    const int m = input.breakpoint_resolution();
    const int rule_points = m > 0 ? 10 : points;
    const double xa = px - eps, xb = px, ya = py - eps, yb = py;
    auto inner = [&](double Y) {
      std::vector<double> breaks;
      if (m > 0) {
        add_lattice_breaks(breaks, xa, xb, 0.0, m);
        add_lattice_breaks(breaks, xa, xb, Y, m);
      }
      const double ky = kernel_1d((py - Y) / eps);
      return ky * integrate_pieces([&](double X) { return input(X, Y) * kernel_1d((px - X) / eps); }, xa, xb,
                                   std::move(breaks), rule_points);
    };
    std::vector<double> breaks;
    if (m > 0) {
      add_lattice_breaks(breaks, ya, yb, 0.0, m);
      add_lattice_breaks(breaks, ya, yb, px, m);
      add_lattice_breaks(breaks, ya, yb, px - eps, m);
    }
    return integrate_pieces(inner, ya, yb, std::move(breaks), rule_points) / (eps * eps);
  }

  double raw(double x, double y) const {
    const double s = 1.0 - 4.0 * eps;
    return convolve(s * x + eps, s * y + 3.0 * eps) - eps * (x * x + y * y - x * y);
  }

  double eval(double x, double y) const override { return raw(x, y) - (c0 + c1 * x + c2 * y); }
};

}  // namespace

ContinuumHive ContinuumHive::analytic(std::function<double(double, double)> f) {
  auto impl = std::make_shared<AnalyticImpl>();
  impl->f = std::move(f);
  return ContinuumHive(impl);
}

ContinuumHive ContinuumHive::piecewise_linear(int m, std::vector<double> values) {
  if (m < 1) throw DomainError("piecewise-linear hive needs m >= 1");
  auto impl = std::make_shared<PiecewiseLinearImpl>();
  impl->m = m;
  impl->field = TriangleField(m, std::move(values));
  return ContinuumHive(impl);
}

ContinuumHive ContinuumHive::from_discrete(const DiscreteHive& h) {
  const double n2 = static_cast<double>(h.n()) * h.n();
  std::vector<double> v = h.values();
  for (double& x : v) x /= n2;
  return piecewise_linear(h.n(), std::move(v));
}

ContinuumHive ContinuumHive::tabulate(int m) const {
  TriangleGrid g(m);
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const GridPoint p = g.point(i);
    v[i] = (*this)(static_cast<double>(p.x) / m, static_cast<double>(p.y) / m);
  }
  return piecewise_linear(m, std::move(v));
}

ContinuumHive constant_hessian_hive(double c) {
  return ContinuumHive::analytic([c](double x, double y) { return -c * (x * x + y * y - x * y) + c * y; });
}

// ---- AugmentedHive ----

AugmentedHive::AugmentedHive(int n) : n_(n), values_(static_cast<std::size_t>(n + 1) * (n + 1), 0.0) {
  if (n < 1) throw DomainError("AugmentedHive: n must be >= 1");
}

double AugmentedHive::value(GridPoint p) const {
  if (p.x < 0 || p.y < 0 || p.x > n_ || p.y > n_) throw DomainError("AugmentedHive: point outside [0,n]^2");
  return values_[static_cast<std::size_t>(p.y) * (n_ + 1) + p.x];
}

double& AugmentedHive::value_ref(GridPoint p) {
  if (p.x < 0 || p.y < 0 || p.x > n_ || p.y > n_) throw DomainError("AugmentedHive: point outside [0,n]^2");
  return values_[static_cast<std::size_t>(p.y) * (n_ + 1) + p.x];
}

GridPoint AugmentedHive::point_of_matrix(int n, int i, int j) { return {n + 1 - i, j - 1}; }

std::pair<int, int> AugmentedHive::matrix_of_point(int n, GridPoint p) { return {n + 1 - p.x, p.y + 1}; }

double AugmentedHive::matrix(int i, int j) const { return value(point_of_matrix(n_, i, j)); }

DiscreteHive AugmentedHive::hive_part() const {
  DiscreteHive h(n_);
  for (const GridPoint& p : h.grid().points()) h.at(p) = value(p);
  return h;
}

nlohmann::json AugmentedHive::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 1; i <= n_ + 1; ++i) {
    std::vector<double> row;
    for (int j = 1; j <= n_ + 1; ++j) row.push_back(matrix(i, j));
    rows.push_back(row);
  }
  return {{"n", n_}, {"matrix", rows}};
}

bool GTPattern::interlaces(double tol) const {
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const auto& lower = rows[k];
    const auto& upper = rows[k + 1];
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (upper[i] < lower[i] - tol || lower[i] < upper[i + 1] - tol) return false;
  }
  return true;
}

// ---- validation, lift, boundary ----

HiveReport validate_hive(const DiscreteHive& h, std::span<const double> lambda, std::span<const double> mu,
                         std::span<const double> nu, double tol) {
  const int n = h.n();
  if (static_cast<int>(lambda.size()) != n || static_cast<int>(mu.size()) != n || static_cast<int>(nu.size()) != n)
    throw DomainError("validate_hive: spectrum lengths must equal n");
  const double scale = std::max(1.0, h.max_abs());
  const double btol = tol < 0.0 ? 1e-9 * scale : tol;
  HiveReport r;
  auto check = [&](const std::string& side, int k, double expected, double actual) {
    if (std::abs(expected - actual) > btol) r.boundary_failures.push_back({side, k, expected, actual});
  };
  check("corner", 0, 0.0, h({0, 0}));
  for (int k = 1; k <= n; ++k) {
    check("lambda", k, lambda[k - 1], h({0, k}) - h({0, k - 1}));
    check("mu", k, mu[k - 1], h({k, n}) - h({k - 1, n}));
    check("nu", k, nu[k - 1], h({k, k}) - h({k - 1, k - 1}));
  }
  r.violations = is_rhombus_concave(h, tol < 0.0 ? -1.0 : tol).violations;
  r.pass = r.boundary_failures.empty() && r.violations.empty();
  return r;
}

DiscreteHive lift(const ContinuumHive& h, int n) {
  if (n < 1) throw DomainError("lift: n must be >= 1");
  DiscreteHive out(n);
  const double n2 = static_cast<double>(n) * n;
  for (const GridPoint& p : out.grid().points())
    out.at(p) = n2 * h(static_cast<double>(p.x) / n, static_cast<double>(p.y) / n);
  return out;
}

DiscreteHive boundary_field(std::span<const double> lambda, std::span<const double> mu,
                            std::span<const double> nu) {
  const int n = static_cast<int>(lambda.size());
  if (n < 1 || static_cast<int>(mu.size()) != n || static_cast<int>(nu.size()) != n)
    throw DomainError("boundary_field: spectra must have equal positive length");
  DiscreteHive h(n);
  double s = 0.0;
  for (int k = 1; k <= n; ++k) h.at({0, k}) = (s += lambda[k - 1]);
  for (int k = 1; k <= n; ++k) h.at({k, n}) = (s += mu[k - 1]);
  double t = 0.0;
  for (int k = 1; k < n; ++k) h.at({k, k}) = (t += nu[k - 1]);
  t += nu[n - 1];
  double scale = 1.0;
  for (double v : h.values()) scale = std::max(scale, std::abs(v));
  if (std::abs(t - s) > 1e-9 * n * scale)
    throw InfeasibleError("boundary data inconsistent: sum(lambda) + sum(mu) != sum(nu)");
  return h;
}

HiveBoundary boundary_of(const DiscreteHive& h) {
  const int n = h.n();
  HiveBoundary b;
  for (int k = 1; k <= n; ++k) {
    b.lambda.push_back(h({0, k}) - h({0, k - 1}));
    b.mu.push_back(h({k, n}) - h({k - 1, n}));
    b.nu.push_back(h({k, k}) - h({k - 1, k - 1}));
  }
  return b;
}

double profile_alpha(const ContinuumHive& h, double t) { return h(0.0, t); }
double profile_beta(const ContinuumHive& h, double t) { return h(t, 1.0) - h(0.0, 1.0); }
double profile_gamma(const ContinuumHive& h, double t) { return h(t, t); }

GTPattern extract_gt(const AugmentedHive& a, double tol) {
  const int n = a.n();
  GTPattern g;
  g.rows.resize(n);
  // Row r (r = 0 is the top) has n - r entries e_r(y) = a(y+r, y) - a(y+r-1, y-1).
  for (int r = 0; r < n; ++r) {
    auto& row = g.rows[n - 1 - r];
    for (int y = 1; y <= n - r; ++y) row.push_back(a.value({y + r, y}) - a.value({y + r - 1, y - 1}));
  }
  double scale = 1.0;
  for (const auto& row : g.rows)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (!g.interlaces(tol * scale)) throw DomainError("extract_gt: interlacing violated");
  return g;
}

double theta(double x, double y, double eps) {
  if (!(eps > 0.0)) throw DomainError("theta: eps must be > 0");
  return kernel_1d(x / eps) * kernel_1d(y / eps) / (eps * eps);
}

ContinuumHive mollify(const ContinuumHive& h, double eps, int quadrature_points) {
  if (!(eps > 0.0 && eps < 1.0 / 16.0)) throw DomainError("mollify: eps must lie in (0, 1/16)");
  if (!h.valid()) throw DomainError("mollify: empty input");
  gauss_legendre(quadrature_points);  // validates the count
  auto impl = std::make_shared<MollifiedImpl>();
  impl->input = h;
  impl->eps = eps;
  impl->points = quadrature_points;
  const double g00 = impl->raw(0.0, 0.0), g01 = impl->raw(0.0, 1.0), g11 = impl->raw(1.0, 1.0);
  impl->c0 = g00;
  impl->c1 = g11 - g01;
  impl->c2 = g01 - g00;
  return ContinuumHive(impl);
}

nlohmann::json hive_to_json(const DiscreteHive& h) { return {{"n", h.n()}, {"values", h.values()}}; }

DiscreteHive hive_from_json(const nlohmann::json& j) {
  return DiscreteHive(j.at("n").get<int>(), j.at("values").get<std::vector<double>>());
}

}  // namespace hivelab
