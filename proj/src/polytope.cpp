#include "hivelab/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "hivelab/errors.hpp"
#include "hivelab/linprog.hpp"
#include "hivelab/numeric.hpp"

namespace hivelab {

// ---- LinearInequalitySystem ----

LinearInequalitySystem::LinearInequalitySystem(int dimension) : dim_(0) {
  for (int i = 0; i < dimension; ++i) add_coordinate("x" + std::to_string(i));
}

int LinearInequalitySystem::add_coordinate(std::string name, std::optional<GridPoint> point) {
  names_.push_back(std::move(name));
  points_.push_back(point);
  return dim_++;
}

std::optional<int> LinearInequalitySystem::coordinate_of(GridPoint p) const {
  for (int i = 0; i < dim_; ++i)
    if (points_[i] && *points_[i] == p) return i;
  return std::nullopt;
}

std::vector<std::pair<int, double>> LinearInequalitySystem::merge(std::vector<std::pair<int, double>> terms) {
  std::sort(terms.begin(), terms.end());
  std::vector<std::pair<int, double>> out;
  for (const auto& [c, v] : terms) {
    if (!out.empty() && out.back().first == c) out.back().second += v;
    else out.emplace_back(c, v);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& t) { return t.second == 0.0; }), out.end());
  return out;
}

void LinearInequalitySystem::add_inequality(std::vector<std::pair<int, double>> terms, double rhs) {
  for (const auto& t : terms)
    if (t.first < 0 || t.first >= dim_) throw DomainError("add_inequality: coordinate out of range");
  auto merged = merge(std::move(terms));
  if (merged.empty()) {
    if (rhs < -1e-9 * std::max(1.0, std::abs(rhs))) ++constant_violations_;
    return;
  }
  rows_.push_back({std::move(merged), rhs});
}

void LinearInequalitySystem::add_equality(std::vector<std::pair<int, double>> terms, double rhs) {
  for (const auto& t : terms)
    if (t.first < 0 || t.first >= dim_) throw DomainError("add_equality: coordinate out of range");
  auto merged = merge(std::move(terms));
  if (merged.empty()) {
    if (std::abs(rhs) > 1e-9) ++constant_violations_;
    return;
  }
  equalities_.push_back({std::move(merged), rhs});
}

Eigen::MatrixXd LinearInequalitySystem::inequality_matrix() const {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows_.size()), dim_);
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (const auto& [c, v] : rows_[i].terms) A(static_cast<Eigen::Index>(i), c) += v;
  return A;
}

Eigen::VectorXd LinearInequalitySystem::inequality_rhs() const {
  Eigen::VectorXd b(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) b(static_cast<Eigen::Index>(i)) = rows_[i].rhs;
  return b;
}

double LinearInequalitySystem::max_violation(const Eigen::VectorXd& x) const {
  double worst = constant_violations_ > 0 ? 1.0 : -std::numeric_limits<double>::infinity();
  for (const auto& r : rows_) {
    double s = -r.rhs;
    for (const auto& [c, v] : r.terms) s += v * x(c);
    worst = std::max(worst, s);
  }
  for (const auto& r : equalities_) {
    double s = -r.rhs;
    for (const auto& [c, v] : r.terms) s += v * x(c);
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

std::string LinearInequalitySystem::to_hrep() const {
  std::ostringstream os;
  os.precision(17);
  os << "# dimension " << dim_ << "\n# coordinates";
  for (const auto& n : names_) os << ' ' << n;
  os << '\n';
  auto emit = [&](const SparseRow& r, const char* op) {
    std::vector<double> dense(dim_, 0.0);
    for (const auto& [c, v] : r.terms) dense[c] = v;
    os << op;
    for (double v : dense) os << ' ' << v;
    os << ' ' << r.rhs << '\n';
  };
  for (const auto& r : rows_) emit(r, "<=");
  for (const auto& r : equalities_) emit(r, "=");
  return os.str();
}

ReducedBody reduce(const LinearInequalitySystem& sys) {
  const int d = sys.dimension();
  ReducedBody body;
  body.infeasible_constant = sys.constant_violations() > 0;
  const Eigen::MatrixXd A = sys.inequality_matrix();
  const Eigen::VectorXd b = sys.inequality_rhs();
  if (sys.equalities().empty()) {
    body.origin = Eigen::VectorXd::Zero(d);
    body.basis = Eigen::MatrixXd::Identity(d, d);
  } else {
    const auto& eq = sys.equalities();
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(eq.size()), d);
    Eigen::VectorXd f(static_cast<Eigen::Index>(eq.size()));
    for (std::size_t i = 0; i < eq.size(); ++i) {
      for (const auto& [c, v] : eq[i].terms) E(static_cast<Eigen::Index>(i), c) += v;
      f(static_cast<Eigen::Index>(i)) = eq[i].rhs;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    svd.setThreshold(1e-10);
    const int rank = static_cast<int>(svd.rank());
    body.origin = svd.solve(f);
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if ((E * body.origin - f).cwiseAbs().maxCoeff() > 1e-8 * scale) body.infeasible_constant = true;
    body.basis = svd.matrixV().rightCols(d - rank);
  }
  Eigen::MatrixXd Ar = A * body.basis;
  Eigen::VectorXd br = b - A * body.origin;
  // Drop rows that vanish on the affine hull, checking their constant part.
  std::vector<Eigen::Index> keep;
  const double scale = std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 1.0);
  for (Eigen::Index i = 0; i < Ar.rows(); ++i) {
    if (Ar.row(i).norm() > 1e-12 * std::max(1.0, A.row(i).norm())) keep.push_back(i);
    else if (br(i) < -1e-9 * scale) body.infeasible_constant = true;
  }
  body.A.resize(static_cast<Eigen::Index>(keep.size()), Ar.cols());
  body.b.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    body.A.row(static_cast<Eigen::Index>(k)) = Ar.row(keep[k]);
    body.b(static_cast<Eigen::Index>(k)) = br(keep[k]);
  }
  return body;
}

// ---- builders ----

namespace {

// Lattice field with some values fixed and the rest mapped to coordinates.
class FieldSystemBuilder {
 public:
  void fix(GridPoint p, double v) { fixed_[p] = v; }
  void free(GridPoint p) {
    if (!vars_.count(p)) vars_[p] = sys_.add_coordinate("h(" + std::to_string(p.x) + "," + std::to_string(p.y) + ")", p);
  }
  bool known(GridPoint p) const { return fixed_.count(p) || vars_.count(p); }

  // Δ(e) <= bound.
  void add_rhombus(const Rhombus& e, double bound) {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;
    const double sign[4] = {1.0, -1.0, 1.0, -1.0};
    for (int k = 0; k < 4; ++k) {
      const GridPoint p = e.vertices[k];
      if (auto it = vars_.find(p); it != vars_.end()) terms.emplace_back(it->second, sign[k]);
      else if (auto jt = fixed_.find(p); jt != fixed_.end()) constant += sign[k] * jt->second;
      else throw DomainError("rhombus vertex outside the field");
    }
    sys_.add_inequality(std::move(terms), bound - constant);
  }

  LinearInequalitySystem& system() { return sys_; }

 private:
  LinearInequalitySystem sys_;
  std::map<GridPoint, double> fixed_;
  std::map<GridPoint, int> vars_;
};

std::vector<double> cumulative(std::span<const double> v) {
  std::vector<double> c(v.size() + 1, 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) c[i + 1] = c[i] + v[i];
  return c;
}

void check_lengths(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty() || a.size() != b.size()) throw DomainError(std::string(what) + ": spectra must have equal positive length");
}

}  // namespace

LinearInequalitySystem build_hive_polytope(std::span<const double> lambda, std::span<const double> mu,
                                           std::span<const double> nu) {
  check_lengths(lambda, mu, "build_hive_polytope");
  check_lengths(lambda, nu, "build_hive_polytope");
  const int n = static_cast<int>(lambda.size());
  const DiscreteHive boundary = boundary_field(lambda, mu, nu);  // throws on corner mismatch
  FieldSystemBuilder b;
  TriangleGrid grid(n);
  for (const GridPoint& p : grid.points()) {
    if (grid.on_boundary(p)) b.fix(p, boundary(p));
    else b.free(p);
  }
  for (RhombusKind kind : kAllKinds)
    for (const Rhombus& e : enumerate_rhombi(grid, kind)) b.add_rhombus(e, 0.0);
  return std::move(b.system());
}

DiscreteHive hive_from_coordinates(const LinearInequalitySystem& sys, std::span<const double> lambda,
                                   std::span<const double> mu, std::span<const double> nu,
                                   const Eigen::VectorXd& x) {
  DiscreteHive h = boundary_field(lambda, mu, nu);
  for (int c = 0; c < sys.dimension(); ++c) {
    const auto& p = sys.point(c);
    if (!p) throw DomainError("hive_from_coordinates: coordinate without grid point");
    h.at(*p) = x(c);
  }
  return h;
}

LinearInequalitySystem build_augmented_polytope(std::span<const double> lambda, std::span<const double> mu,
                                                const std::optional<AugmentedBall>& ball) {
  check_lengths(lambda, mu, "build_augmented_polytope");
  const int n = static_cast<int>(lambda.size());
  const auto L = cumulative(lambda);
  const auto M = cumulative(mu);
  FieldSystemBuilder b;
  // Hive side x <= y.
  for (int y = 0; y <= n; ++y) {
    for (int x = 0; x <= y; ++x) {
      if (x == 0) b.fix({x, y}, L[y]);
      else if (y == n) b.fix({x, y}, L[n] + M[x]);
      else if (x == y) b.free({x, y});
      else b.free({x, y});
    }
  }
  // GT side x > y; the line y = 0 is zero.
  for (int x = 1; x <= n; ++x) {
    for (int y = 0; y < x; ++y) {
      if (y == 0) b.fix({x, y}, 0.0);
      else b.free({x, y});
    }
  }
  TriangleGrid grid(n);
  for (RhombusKind kind : kAllKinds)
    for (const Rhombus& e : enumerate_rhombi(grid, kind)) b.add_rhombus(e, 0.0);
  auto lower = [n](GridPoint p) { return p.y >= 0 && p.x <= n && p.x >= p.y; };
  for (RhombusKind kind : {RhombusKind::HorizontalEdge, RhombusKind::VerticalEdge}) {
    for (int x = 0; x <= n; ++x) {
      for (int y = 0; y <= x; ++y) {
        const Rhombus e = make_rhombus(kind, {x, y});
        if (std::all_of(e.vertices.begin(), e.vertices.end(), lower)) b.add_rhombus(e, 0.0);
      }
    }
  }
  LinearInequalitySystem& sys = b.system();
  if (ball) {
    if (static_cast<int>(ball->center.size()) != n) throw DomainError("build_augmented_polytope: ball center length");
    for (const PrefixConstraint& pc : ball_constraints_I(ball->center, ball->radius)) {
      // Prefix sum of ν' up to k is the diagonal value at (k, k).
      const auto coord = sys.coordinate_of({pc.prefix, pc.prefix});
      if (!coord) throw NumericError("build_augmented_polytope: missing diagonal coordinate");
      sys.add_inequality({{*coord, pc.sign}}, pc.rhs);
    }
  }
  return std::move(sys);
}

AugmentedHive augmented_from_coordinates(const LinearInequalitySystem& sys, std::span<const double> lambda,
                                         std::span<const double> mu, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(lambda.size());
  const auto L = cumulative(lambda);
  const auto M = cumulative(mu);
  AugmentedHive a(n);
  for (int y = 0; y <= n; ++y) a.value_ref({0, y}) = L[y];
  for (int k = 0; k <= n; ++k) a.value_ref({k, n}) = L[n] + M[k];
  for (int c = 0; c < sys.dimension(); ++c) {
    const auto& p = sys.point(c);
    if (!p) throw DomainError("augmented_from_coordinates: coordinate without grid point");
    a.value_ref(*p) = x(c);
  }
  return a;
}

LinearInequalitySystem build_torus_polytope(int n, std::array<double, 3> s, TorusVariant variant) {
  if (n < 1) throw DomainError("build_torus_polytope: n must be >= 1");
  for (double v : s)
    if (v < 0.0) throw DomainError("build_torus_polytope: s must be nonnegative");
  TorusGrid grid(n);
  LinearInequalitySystem sys;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) sys.add_coordinate("g(" + std::to_string(x) + "," + std::to_string(y) + ")", GridPoint{x, y});
  const double sign[4] = {1.0, -1.0, 1.0, -1.0};
  for (RhombusKind kind : kAllKinds) {
    for (const Rhombus& e : enumerate_rhombi(grid, kind)) {
      std::vector<std::pair<int, double>> terms;
      for (int k = 0; k < 4; ++k) terms.emplace_back(static_cast<int>(grid.index(e.vertices[k])), sign[k]);
      sys.add_inequality(std::move(terms), s[kind_index(kind)]);
    }
  }
  if (variant == TorusVariant::SumZero) {
    std::vector<std::pair<int, double>> all;
    for (int c = 0; c < n * n; ++c) all.emplace_back(c, 1.0);
    sys.add_equality(std::move(all), 0.0);
  } else {
    sys.add_equality({{0, 1.0}}, 0.0);
  }
  return sys;
}

LinearInequalitySystem build_gt_polytope(std::span<const double> nu) {
  const int n = static_cast<int>(nu.size());
  if (n < 1) throw DomainError("build_gt_polytope: empty top row");
  LinearInequalitySystem sys;
  // coord[k][i]: entry i of row k (row k has k + 1 entries); row n - 1 is ν.
  std::vector<std::vector<int>> coord(n);
  for (int k = 0; k + 1 < n; ++k)
    for (int i = 0; i <= k; ++i)
      coord[k].push_back(sys.add_coordinate("gt(" + std::to_string(k) + "," + std::to_string(i) + ")"));
  auto term = [&](int k, int i, double sgn, std::vector<std::pair<int, double>>& terms, double& rhs) {
    if (k == n - 1) rhs -= sgn * nu[i];
    else terms.emplace_back(coord[k][i], sgn);
  };
  for (int k = 0; k + 1 < n; ++k) {
    for (int i = 0; i <= k; ++i) {
      // upper[i] >= lower[i]  ->  lower[i] - upper[i] <= 0
      {
        std::vector<std::pair<int, double>> t;
        double rhs = 0.0;
        term(k, i, 1.0, t, rhs);
        term(k + 1, i, -1.0, t, rhs);
        sys.add_inequality(std::move(t), rhs);
      }
      // lower[i] >= upper[i+1]  ->  upper[i+1] - lower[i] <= 0
      {
        std::vector<std::pair<int, double>> t;
        double rhs = 0.0;
        term(k + 1, i + 1, 1.0, t, rhs);
        term(k, i, -1.0, t, rhs);
        sys.add_inequality(std::move(t), rhs);
      }
    }
  }
  return sys;
}

LinearInequalitySystem condition_on(const LinearInequalitySystem& sys, std::span<const int> coords,
                                    std::span<const double> values, double slack) {
  if (coords.size() != values.size()) throw DomainError("condition_on: coords and values differ in length");
  if (slack < 0.0) throw DomainError("condition_on: slack must be >= 0");
  LinearInequalitySystem out = sys;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    if (coords[k] < 0 || coords[k] >= sys.dimension()) throw DomainError("condition_on: coordinate out of range");
    if (slack == 0.0) {
      out.add_equality({{coords[k], 1.0}}, values[k]);
    } else {
      out.add_inequality({{coords[k], 1.0}}, values[k] + slack);
      out.add_inequality({{coords[k], -1.0}}, -(values[k] - slack));
    }
  }
  return out;
}

// ---- interior point and bounds ----

InteriorPoint interior_point(const ReducedBody& body, double tol) {
  if (body.infeasible_constant) throw InfeasibleError("interior_point: constant rows are violated");
  const int d = body.dim();
  const Eigen::Index m = body.A.rows();
  const double scale = std::max(1.0, m ? body.b.cwiseAbs().maxCoeff() : 1.0);
  InteriorPoint ip;
  if (d == 0) {
    ip.y = Eigen::VectorXd::Zero(0);
    ip.x = body.origin;
    ip.margin = m ? body.b.minCoeff() : std::numeric_limits<double>::infinity();
    if (ip.margin < -tol * scale) throw InfeasibleError("interior_point: the single point violates a row");
    ip.radius = 0.0;
    ip.full_dimensional = true;
    return ip;
  }
  if (m == 0) throw DomainError("interior_point: body is unbounded (no rows)");
  // maximize r  s.t.  A y + |a_i| r <= b,  r <= cap
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m + 1, d + 1);
  Eigen::VectorXd rhs(m + 1);
  L.topLeftCorner(m, d) = body.A;
  for (Eigen::Index i = 0; i < m; ++i) L(i, d) = body.A.row(i).norm();
  rhs.head(m) = body.b;
  L(m, d) = 1.0;
  rhs(m) = 1e6 * scale;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d + 1);
  c(d) = 1.0;
  const LpResult lp = solve_lp(L, rhs, c, 1e-11);
  if (lp.status != LpStatus::Optimal) throw NumericError("interior_point: Chebyshev LP failed");
  const double r = lp.x(d);
  if (r < -tol * scale) throw InfeasibleError("interior_point: no feasible point (max slack below tolerance)");
  ip.y = lp.x.head(d);
  ip.x = body.lift(ip.y);
  ip.radius = std::max(0.0, r);
  ip.margin = (body.b - body.A * ip.y).minCoeff();
  ip.full_dimensional = r > tol * scale;
  return ip;
}

InteriorPoint interior_point(const LinearInequalitySystem& sys, double tol) { return interior_point(reduce(sys), tol); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box(const ReducedBody& body) {
  const int d = body.dim();
  Eigen::VectorXd lo(d), hi(d);
  for (int j = 0; j < d; ++j) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(d);
    c(j) = 1.0;
    const LpResult up = solve_lp(body.A, body.b, c, 1e-11);
    const LpResult down = solve_lp(body.A, body.b, -c, 1e-11);
    if (up.status == LpStatus::Unbounded || down.status == LpStatus::Unbounded)
      throw DomainError("bounding_box: body is unbounded");
    if (up.status != LpStatus::Optimal || down.status != LpStatus::Optimal)
      throw InfeasibleError("bounding_box: body is empty");
    hi(j) = up.value;
    lo(j) = -down.value;
  }
  return {lo, hi};
}

// ---- hit-and-run ----

HitAndRunChain::HitAndRunChain(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd start,
                               std::uint64_t seed, DirectionMode mode)
    : A_(A), b_(b), y_(std::move(start)), rng_(make_rng(seed)), mode_(mode) {
  refresh_slack();
  if (slack_.size() && slack_.minCoeff() < 0.0) throw DomainError("hit-and-run: start point is not feasible");
}

void HitAndRunChain::set_ball(const Eigen::VectorXd& center, double radius) {
  center_ = center;
  radius2_ = radius * radius;
}

double HitAndRunChain::ball_distance2() const { return radius2_ < 0.0 ? 0.0 : (y_ - center_).squaredNorm(); }

void HitAndRunChain::refresh_slack() { slack_ = b_ - A_ * y_; }

void HitAndRunChain::step() {
  const Eigen::Index d = y_.size();
  if (d == 0) return;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXd u;
  Eigen::VectorXd Au;
  Eigen::Index axis = -1;
  for (int attempt = 0; attempt < 100; ++attempt) {
    if (mode_ == DirectionMode::Isotropic) {
      u.resize(d);
      for (Eigen::Index k = 0; k < d; ++k) u(k) = gauss(rng_);
      u.normalize();
      Au = A_ * u;
    } else {
      axis = static_cast<Eigen::Index>(std::uniform_int_distribution<long>(0, d - 1)(rng_));
      Au = A_.col(axis);
    }
    double tmin = -std::numeric_limits<double>::infinity(), tmax = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < Au.size(); ++i) {
      const double a = Au(i);
      if (a > 1e-14) tmax = std::min(tmax, slack_(i) / a);
      else if (a < -1e-14) tmin = std::max(tmin, slack_(i) / a);
    }
    if (radius2_ >= 0.0) {
      const double p = mode_ == DirectionMode::Isotropic ? u.dot(y_ - center_) : y_(axis) - center_(axis);
      const double q = (y_ - center_).squaredNorm() - radius2_;
      const double disc = p * p - q;
      if (disc > 0.0) {
        const double root = std::sqrt(disc);
        tmin = std::max(tmin, -p - root);
        tmax = std::min(tmax, -p + root);
      } else {
        tmin = tmax = 0.0;
      }
    }
    if (!std::isfinite(tmin) || !std::isfinite(tmax)) throw DomainError("hit-and-run: body is unbounded");
    if (tmax - tmin <= 1e-15 * (1.0 + y_.cwiseAbs().maxCoeff())) {
      ++degenerate_;
      continue;
    }
    const double t = tmin + (tmax - tmin) * unif(rng_);
    if (mode_ == DirectionMode::Isotropic) y_ += t * u;
    else y_(axis) += t;
    slack_ -= t * Au;
    if (++steps_ % 1024 == 0) refresh_slack();
    return;
  }
  throw NumericError("hit-and-run: repeated zero-length chords");
}

SampleStream hit_and_run(const LinearInequalitySystem& sys, const Eigen::VectorXd& start, long steps,
                         std::uint64_t seed, const HitAndRunOptions& options) {
  const ReducedBody body = reduce(sys);
  if (start.size() != sys.dimension()) throw DomainError("hit_and_run: start has the wrong dimension");
  const Eigen::VectorXd y0 = body.basis.transpose() * (start - body.origin);
  if (body.A.rows() && (body.b - body.A * y0).minCoeff() <= 0.0)
    throw DomainError("hit_and_run: start must be strictly interior");
  HitAndRunChain chain(body.A, body.b, y0, seed, options.directions);
  SampleStream out;
  for (int k = 0; k < options.burn_in; ++k) chain.step();
  const int thin = std::max(1, options.thin);
  for (long k = 1; k <= steps; ++k) {
    chain.step();
    if (k % thin == 0) out.samples.push_back(body.lift(chain.state()));
  }
  out.degenerate_chords = chain.degenerate_chords();
  return out;
}

}  // namespace hivelab
