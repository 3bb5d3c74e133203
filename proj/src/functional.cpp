#include "hivelab/functional.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"
#include "hivelab/polytope.hpp"
#include "hivelab/vandermonde.hpp"

namespace hivelab {

namespace {

constexpr double kDiffStep = 2e-5;
constexpr int kFluxLevel = 4;
constexpr int kEdgePoints = 10;

using Vec2 = std::array<double, 2>;

bool in_triangle(double x, double y) { return x >= 0.0 && x <= y && y <= 1.0; }

// Directional derivative of h at p along d, with a stencil kept inside T.
double directional(const ContinuumHive& h, Vec2 p, Vec2 d) {
  const double e = kDiffStep;
  auto at = [&](double t) { return h(p[0] + t * d[0], p[1] + t * d[1]); };
  auto inside = [&](double t) { return in_triangle(p[0] + t * d[0], p[1] + t * d[1]); };
  if (inside(e) && inside(-e)) return (at(e) - at(-e)) / (2.0 * e);
  if (inside(e) && inside(2.0 * e)) return (-3.0 * at(0.0) + 4.0 * at(e) - at(2.0 * e)) / (2.0 * e);
  if (inside(-e) && inside(-2.0 * e)) return (3.0 * at(0.0) - 4.0 * at(-e) + at(-2.0 * e)) / (2.0 * e);
  throw NumericError("directional derivative: no stencil fits inside T");
}

// Derivative of a profile on [0, 1].
double profile_derivative(const std::function<double(double)>& f, double t) {
  const double e = 1e-6;
  if (t - e >= 0.0 && t + e <= 1.0) return (f(t + e) - f(t - e)) / (2.0 * e);
  if (t + 2.0 * e <= 1.0) return (-3.0 * f(t) + 4.0 * f(t + e) - f(t + 2.0 * e)) / (2.0 * e);
  return (3.0 * f(t) - 4.0 * f(t - e) + f(t - 2.0 * e)) / (2.0 * e);
}

double profile_log_v(const std::function<double(double)>& profile) {
  const ContinuumLogV v = continuum_logV([&](double t) { return profile_derivative(profile, t); });
  return v.divergent ? -kInfinity : v.value;
}

// Counterclockwise polygon of a cell in T coordinates.
std::vector<Vec2> cell_polygon(const DyadicCell& c) {
  const double s = std::ldexp(1.0, -c.level);
  const double X = static_cast<double>(c.X) * s, Y = static_cast<double>(c.Y) * s;
  if (c.shape == CellShape::Triangle) return {{X, Y}, {X + s, Y + s}, {X, Y + s}};
  return {{X, Y}, {X + s, Y}, {X + s, Y + s}, {X, Y + s}};
}

double discrete_log_v(std::span<const double> v) {
  const int n = static_cast<int>(v.size());
  const LogValue r = log_ratio_to_tau(v);
  if (r.degenerate) return -kInfinity;
  return 2.0 * r.value / (static_cast<double>(n) * n);
}

Slopes sigma_argument(const std::array<double, 3>& mass) { return {-mass[0], -mass[1], -mass[2]}; }

Eigen::Vector3d sigma_gradient(const SigmaTable& table, const Slopes& s, SigmaInterpolation mode) {
  if (mode == SigmaInterpolation::ConcaveEnvelope) return table.envelope_gradient(s);
  Eigen::Vector3d g;
  for (int i = 0; i < 3; ++i) {
    Slopes hi = s, lo = s;
    const double e = 1e-6 * s[i];
    hi[i] += e;
    lo[i] -= e;
    g(i) = (table.interpolate(hi, mode) - table.interpolate(lo, mode)) / (2.0 * e);
  }
  return g;
}

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json cell_json(const DyadicCell& c) {
  return {{"shape", c.shape == CellShape::Triangle ? "triangle" : "square"}, {"level", c.level}, {"X", c.X}, {"Y", c.Y}};
}

}  // namespace

CellMasses coarsen(const CellMasses& fine) {
  if (fine.level < 1) throw DomainError("coarsen: level 0 has no parent level");
  CellMasses out;
  out.level = fine.level - 1;
  out.cells = dyadic_partition(out.level);
  out.mass.assign(out.cells.size(), {0.0, 0.0, 0.0});
  out.rhombus_count.assign(out.cells.size(), {0, 0, 0});
  for (std::size_t c = 0; c < fine.cells.size(); ++c) {
    const std::size_t p = cell_position(fine.cells[c].parent());
    const double w = fine.cells[c].area();
    for (int i = 0; i < 3; ++i) {
      out.mass[p][i] += w * fine.mass[c][i];
      if (!fine.rhombus_count.empty()) out.rhombus_count[p][i] += fine.rhombus_count[c][i];
    }
  }
  for (std::size_t p = 0; p < out.cells.size(); ++p)
    for (int i = 0; i < 3; ++i) out.mass[p][i] /= out.cells[p].area();
  return out;
}

CellMasses continuum_cell_masses(const ContinuumHive& h, int a) {
  if (!h.valid()) throw DomainError("continuum_cell_masses: empty hive");
  if (a < 0 || a > 12) throw DomainError("continuum_cell_masses: level must lie in [0, 12]");
  const int level = std::max(a, kFluxLevel);
  CellMasses m;
  m.level = level;
  m.cells = dyadic_partition(level);
  m.mass.assign(m.cells.size(), {0.0, 0.0, 0.0});
  m.rhombus_count.assign(m.cells.size(), {0, 0, 0});
  const GaussRule& rule = gauss_legendre(kEdgePoints);
  // ∫_κ ∂u ∂v h = ∮ (∂v h)(u · outward normal) ds.
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    const auto poly = cell_polygon(m.cells[c]);
    double sq = 0.0, hor = 0.0, ver = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const Vec2 P = poly[k], Q = poly[(k + 1) % poly.size()];
      const double dx = Q[0] - P[0], dy = Q[1] - P[1];
      // u · (dy, -dx) for u = e_x and e_y.
      const double nx = dy, ny = -dx;
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double t = 0.5 * (rule.nodes[q] + 1.0);
        const double w = 0.5 * rule.weights[q];
        const Vec2 p{P[0] + t * dx, P[1] + t * dy};
        const double gy = directional(h, p, {0.0, 1.0});
        const double gd = directional(h, p, {1.0, 1.0});
        sq += w * gy * nx;   // ∂x∂y
        hor += w * gd * ny;  // ∂y∂d
        ver += w * gd * nx;  // ∂x∂d
      }
    }
    const double area = m.cells[c].area();
    m.mass[c] = {-sq / area, hor / area, ver / area};
  }
  CellMasses out = std::move(m);
  while (out.level > a) out = coarsen(out);
  return out;
}

double sigma_integral(const CellMasses& masses, const SigmaTable& table, SigmaInterpolation mode, double floor,
                      bool clamp, std::vector<CellFlag>* flagged) {
  double total = 0.0;
  bool infinite = false;
  for (std::size_t c = 0; c < masses.cells.size(); ++c) {
    Slopes s = sigma_argument(masses.mass[c]);
    bool low = false;
    for (int i = 0; i < 3; ++i) {
      if (s[i] > floor) continue;
      low = true;
      if (flagged) flagged->push_back({masses.cells[c], i, s[i]});
      if (clamp) s[i] = floor;
    }
    if (low && !clamp) {
      infinite = true;
      continue;
    }
    if (infinite) continue;
    const double sg = table.interpolate(s, mode);
    if (!std::isfinite(sg)) {
      infinite = true;
      continue;
    }
    total += masses.cells[c].area() * sg;
  }
  return infinite ? kInfinity : total;
}

double diagonal_log_v(const ContinuumHive& h) {
  return profile_log_v([&](double t) { return profile_gamma(h, t); });
}

namespace {

JaValue finish_ja(int a, double log_v, const CellMasses& masses, const SigmaTable& table, SigmaInterpolation mode) {
  JaValue j;
  j.level = a;
  j.log_v = log_v;
  j.sigma_integral = sigma_integral(masses, table, mode, kMassFloor, false, &j.flagged);
  j.log_value = log_v - j.sigma_integral;
  if (std::isnan(j.log_value)) j.log_value = -kInfinity;
  return j;
}

FunctionalReport limit_of(const std::function<JaValue(int)>& ja, int a_max, const SigmaTable& table, double rtol) {
  if (a_max < 0) throw DomainError("J_limit: a_max must be >= 0");
  FunctionalReport r;
  r.sigma_version = table.version();
  for (int a = 0; a <= a_max; ++a) r.sequence.push_back(ja(a));
  for (int a = 1; a <= a_max; ++a) {
    const double x = r.sequence[a].log_value, y = r.sequence[a - 1].log_value;
    r.gaps.push_back(std::isfinite(x) && std::isfinite(y) ? std::abs(x - y) : kInfinity);
  }
  r.value = r.sequence.back().log_value;
  for (const auto& j : r.sequence)
    if (!std::isfinite(j.log_value)) r.divergent = true;
  const std::size_t g = r.gaps.size();
  if (g >= 3 && r.gaps[g - 1] >= rtol && r.gaps[g - 1] > r.gaps[g - 2] && r.gaps[g - 2] > r.gaps[g - 3])
    r.divergent = true;
  r.converged = g > 0 && r.gaps.back() < rtol;
  for (std::size_t k = g; k-- > 0;) {
    if (!(r.gaps[k] < rtol)) break;
    r.converged_at = static_cast<int>(k) + 1;
  }
  return r;
}

}  // namespace

JaValue J_a(const DiscreteHive& h, int a, const SigmaTable& table, SigmaInterpolation mode) {
  if (a < 0) throw DomainError("J_a: level must be >= 0");
  return finish_ja(a, discrete_log_v(boundary_of(h).nu), all_cell_masses(h, a), table, mode);
}

JaValue J_a(const ContinuumHive& h, int a, const SigmaTable& table, SigmaInterpolation mode) {
  return finish_ja(a, diagonal_log_v(h), continuum_cell_masses(h, a), table, mode);
}

FunctionalReport J_limit(const ContinuumHive& h, int a_max, const SigmaTable& table, SigmaInterpolation mode,
                         double rtol) {
  if (a_max < 0) throw DomainError("J_limit: a_max must be >= 0");
  // One flux pass at the finest level; coarser levels are exact averages of it.
  std::vector<CellMasses> by_level(a_max + 1);
  by_level[a_max] = continuum_cell_masses(h, a_max);
  for (int a = a_max; a > 0; --a) by_level[a - 1] = coarsen(by_level[a]);
  const double log_v = diagonal_log_v(h);
  return limit_of([&](int a) { return finish_ja(a, log_v, by_level[a], table, mode); }, a_max, table, rtol);
}

FunctionalReport J_limit(const DiscreteHive& h, int a_max, const SigmaTable& table, SigmaInterpolation mode,
                         double rtol) {
  return limit_of([&](int a) { return J_a(h, a, table, mode); }, a_max, table, rtol);
}

nlohmann::json FunctionalReport::to_json() const {
  nlohmann::json seq = nlohmann::json::array();
  for (const auto& j : sequence) {
    nlohmann::json flags = nlohmann::json::array();
    for (const auto& f : j.flagged)
      flags.push_back({{"cell", cell_json(f.cell)}, {"kind", f.kind}, {"argument", f.mass}});
    seq.push_back({{"level", j.level},
                   {"log_J", number(j.log_value)},
                   {"log_V", number(j.log_v)},
                   {"sigma_integral", number(j.sigma_integral)},
                   {"flagged", flags}});
  }
  nlohmann::json g = nlohmann::json::array();
  for (double x : gaps) g.push_back(number(x));
  return {{"value", number(value)},   {"sequence", seq},
          {"gaps", g},                {"converged", converged},
          {"converged_at", converged_at}, {"divergent", divergent},
          {"sigma_version", sigma_version}, {"mass_floor", mass_floor}};
}

double I1(const FunctionalReport& j, double log_v_lambda, double log_v_mu) {
  if (!std::isfinite(j.value) || !std::isfinite(log_v_lambda) || !std::isfinite(log_v_mu)) return kInfinity;
  return -j.value + log_v_lambda + log_v_mu;
}

double I1(const ContinuumHive& h, int a_max, const SigmaTable& table, SigmaInterpolation mode) {
  const FunctionalReport j = J_limit(h, a_max, table, mode);
  const double lv = profile_log_v([&](double t) { return profile_alpha(h, t); });
  const double mv = profile_log_v([&](double t) { return profile_beta(h, t); });
  return I1(j, lv, mv);
}

namespace {

// Rhombus sums behind each (cell, kind) of the optimizer surrogate. A cell
// with no rhombus of a kind anchored in it borrows the sum of its nearest
// ancestor that has one.
struct SurrogateMap {
  int n = 0;
  std::vector<DyadicCell> cells;
  std::vector<Rhombus> rhombi;
  std::vector<std::array<std::vector<int>, 3>> members;
  std::vector<std::array<double, 3>> divisor;  // n^2 |source cell|
};

SurrogateMap build_surrogate(int n, int a) {
  if (n < 2) throw DomainError("sigma objective: n must be >= 2");
  if (a < 0) throw DomainError("sigma objective: level must be >= 0");
  SurrogateMap m;
  m.n = n;
  const TriangleGrid grid(n);
  std::vector<int> kind;
  for (RhombusKind k : kAllKinds)
    for (const Rhombus& e : enumerate_rhombi(grid, k)) {
      m.rhombi.push_back(e);
      kind.push_back(kind_index(k));
    }
  // lists[level][cell][kind]
  std::vector<std::vector<std::array<std::vector<int>, 3>>> lists(a + 1);
  for (int l = 0; l <= a; ++l) {
    lists[l].resize(dyadic_partition(l).size());
    for (std::size_t r = 0; r < m.rhombi.size(); ++r)
      lists[l][cell_position(locate_cell(l, m.rhombi[r].anchor, n))][kind[r]].push_back(static_cast<int>(r));
  }
  m.cells = dyadic_partition(a);
  m.members.resize(m.cells.size());
  m.divisor.resize(m.cells.size());
  const double n2 = static_cast<double>(n) * n;
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    for (int i = 0; i < 3; ++i) {
      DyadicCell src = m.cells[c];
      while (lists[src.level][cell_position(src)][i].empty()) src = src.parent();
      m.members[c][i] = lists[src.level][cell_position(src)][i];
      m.divisor[c][i] = n2 * src.area();
    }
  return m;
}

std::vector<double> rhombus_values(const SurrogateMap& m, const DiscreteHive& h) {
  std::vector<double> d(m.rhombi.size());
  for (std::size_t r = 0; r < m.rhombi.size(); ++r) d[r] = rhombus_second_difference(h, m.rhombi[r]);
  return d;
}

// σ arguments per cell, raised to the floor; clamped entries are marked.
std::vector<Slopes> surrogate_arguments(const SurrogateMap& m, const std::vector<double>& delta, double floor,
                                        std::vector<std::array<bool, 3>>* clamped = nullptr) {
  std::vector<Slopes> out(m.cells.size());
  if (clamped) clamped->assign(m.cells.size(), {false, false, false});
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    for (int i = 0; i < 3; ++i) {
      double sum = 0.0;
      for (int r : m.members[c][i]) sum += delta[r];
      out[c][i] = -sum / m.divisor[c][i];
      if (out[c][i] <= floor) {
        out[c][i] = floor;
        if (clamped) (*clamped)[c][i] = true;
      }
    }
  return out;
}

double surrogate_objective(const SurrogateMap& m, const DiscreteHive& h, const SigmaTable& table,
                           SigmaInterpolation mode, double floor) {
  const auto args = surrogate_arguments(m, rhombus_values(m, h), floor);
  double total = 0.0;
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    const double sg = table.interpolate(args[c], mode);
    if (!std::isfinite(sg)) return kInfinity;
    total += m.cells[c].area() * sg;
  }
  return total;
}

}  // namespace

double hive_sigma_objective(const DiscreteHive& h, int a, const SigmaTable& table, SigmaInterpolation mode,
                            double floor) {
  return surrogate_objective(build_surrogate(h.n(), a), h, table, mode, floor);
}

namespace {

void project(const LinearInequalitySystem& sys, Eigen::VectorXd& x, double tol) {
  const auto& rows = sys.inequalities();
  for (int pass = 0; pass < 100000; ++pass) {
    double worst = 0.0;
    for (const SparseRow& r : rows) {
      double ax = 0.0, norm2 = 0.0;
      for (const auto& [j, c] : r.terms) {
        ax += c * x(j);
        norm2 += c * c;
      }
      const double v = ax - r.rhs;
      if (v <= 0.0 || norm2 == 0.0) continue;
      worst = std::max(worst, v);
      for (const auto& [j, c] : r.terms) x(j) -= v / norm2 * c;
    }
    if (worst <= tol) return;
  }
  throw NumericError("minimize_sigma_integral: alternating projection did not reach tolerance");
}

}  // namespace

MinimizeResult minimize_sigma_integral(std::span<const double> lambda, std::span<const double> mu,
                                       std::span<const double> nu, const SigmaTable& table,
                                       const MinimizeOptions& options) {
  if (options.iterations < 0) throw DomainError("minimize_sigma_integral: iterations must be >= 0");
  const int n = static_cast<int>(lambda.size());
  const SurrogateMap map = build_surrogate(n, options.level);
  const LinearInequalitySystem sys = build_hive_polytope(lambda, mu, nu);
  const InteriorPoint ip = interior_point(sys);
  const int dim = sys.dimension();
  auto hive_at = [&](const Eigen::VectorXd& x) { return hive_from_coordinates(sys, lambda, mu, nu, x); };
  auto objective = [&](const Eigen::VectorXd& x) {
    return surrogate_objective(map, hive_at(x), table, options.mode, options.floor);
  };
  std::vector<std::array<int, 4>> coord(map.rhombi.size());
  for (std::size_t r = 0; r < map.rhombi.size(); ++r)
    for (int v = 0; v < 4; ++v) coord[r][v] = sys.coordinate_of(map.rhombi[r].vertices[v]).value_or(-1);
  auto gradient = [&](const Eigen::VectorXd& x) {
    std::vector<std::array<bool, 3>> clamped;
    const auto args = surrogate_arguments(map, rhombus_values(map, hive_at(x)), options.floor, &clamped);
    // d/dΔ_e of |κ| σ(s) with s_i = -(Σ Δ)/divisor.
    std::vector<double> d_delta(map.rhombi.size(), 0.0);
    for (std::size_t c = 0; c < map.cells.size(); ++c) {
      const Eigen::Vector3d gs = sigma_gradient(table, args[c], options.mode);
      for (int i = 0; i < 3; ++i) {
        if (clamped[c][i]) continue;
        const double w = -map.cells[c].area() * gs(i) / map.divisor[c][i];
        for (int r : map.members[c][i]) d_delta[r] += w;
      }
    }
    static constexpr std::array<double, 4> sign{1.0, -1.0, 1.0, -1.0};
    Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
    for (std::size_t r = 0; r < map.rhombi.size(); ++r)
      for (int v = 0; v < 4; ++v)
        if (coord[r][v] >= 0) g(coord[r][v]) += d_delta[r] * sign[v];
    return g;
  };

  MinimizeResult r;
  Eigen::VectorXd x = ip.x;
  double fx = objective(x);
  r.trace.push_back(fx);
  double step = std::max(ip.radius, 1e-3);
  std::vector<double> history{fx};
  for (int it = 0; it < options.iterations && dim > 0; ++it) {
    r.iterations = it + 1;
    bool accepted = false;
    const Eigen::VectorXd g = gradient(x);
    const double gn = g.norm();
    if (std::isfinite(gn) && gn > 0.0) {
      Eigen::VectorXd cand = x - (step / gn) * g;
      project(sys, cand, options.projection_tol);
      const double fc = objective(cand);
      if (fc < fx) {
        x = cand;
        fx = fc;
        accepted = true;
        step *= 1.5;
      }
    }
    // Coordinate moves get past ridges where the subgradient is not a descent direction.
    for (int k = 0; k < dim && !accepted; ++k)
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd cand = x;
        cand(k) += sgn * step;
        project(sys, cand, options.projection_tol);
        const double fc = objective(cand);
        if (fc < fx) {
          x = cand;
          fx = fc;
          accepted = true;
          break;
        }
      }
    if (accepted) {
      r.trace.push_back(fx);
    } else {
      step *= 0.5;
      if (step < options.min_step) {
        r.converged = true;
        break;
      }
    }
    history.push_back(fx);
    const int w = options.stall_window;
    if (w > 0 && static_cast<int>(history.size()) > w) {
      const double before = history[history.size() - 1 - w];
      if (std::isfinite(before) && before - fx < options.stall_rtol * std::max(1.0, std::abs(before))) {
        r.stalled = true;
        break;
      }
    }
  }
  if (dim == 0) r.converged = true;
  r.objective = fx;
  r.hive = hive_at(x);
  return r;
}

nlohmann::json MinimizeResult::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (double v : trace) t.push_back(number(v));
  return {{"objective", number(objective)}, {"iterations", iterations}, {"converged", converged},
          {"stalled", stalled}, {"trace", t}, {"hive", hive_to_json(hive)}};
}

RateResult rate_I(std::span<const double> lambda, std::span<const double> mu, std::span<const double> nu,
                  const SigmaTable& table, const MinimizeOptions& options) {
  const std::size_t n = lambda.size();
  if (n < 2 || mu.size() != n || nu.size() != n) throw DomainError("rate_I: spectra must share a length >= 2");
  RateResult r;
  r.log_v_lambda = discrete_log_v(lambda);
  r.log_v_mu = discrete_log_v(mu);
  r.log_v_nu = discrete_log_v(nu);
  try {
    r.minimizer = minimize_sigma_integral(lambda, mu, nu, table, options);
  } catch (const InfeasibleError&) {
    r.infeasible = true;
    return r;
  }
  r.sigma_integral = r.minimizer.objective;
  r.value = r.log_v_lambda + r.log_v_mu - r.log_v_nu + r.sigma_integral;
  if (std::isnan(r.value)) r.value = kInfinity;
  return r;
}

RateResult rate_I(const BoundaryProfile& alpha, const BoundaryProfile& beta, const BoundaryProfile& gamma, int n,
                  const SigmaTable& table, const MinimizeOptions& options) {
  const SpectrumVec l = discretize(alpha, n), m = discretize(beta, n), v = discretize(gamma, n);
  return rate_I(l, m, v, table, options);
}

nlohmann::json RateResult::to_json() const {
  nlohmann::json j{{"value", number(value)},         {"log_V_lambda", number(log_v_lambda)},
                   {"log_V_mu", number(log_v_mu)},   {"log_V_nu", number(log_v_nu)},
                   {"sigma_integral", number(sigma_integral)}, {"infeasible", infeasible}};
  if (!infeasible) j["minimizer"] = minimizer.to_json();
  return j;
}

JensenCheck jensen_cells(const CellMasses& masses, const SigmaTable& table, SigmaInterpolation mode, double tol) {
  JensenCheck out;
  CellMasses fine = masses;
  while (fine.level >= 1) {
    const CellMasses coarse = coarsen(fine);
    std::vector<double> mean(coarse.cells.size(), 0.0);
    for (std::size_t c = 0; c < fine.cells.size(); ++c) {
      const std::size_t p = cell_position(fine.cells[c].parent());
      mean[p] += fine.cells[c].area() / coarse.cells[p].area() *
                 table.interpolate(sigma_argument(fine.mass[c]), mode);
    }
    for (std::size_t p = 0; p < coarse.cells.size(); ++p) {
      const double parent = table.interpolate(sigma_argument(coarse.mass[p]), mode);
      const double gap = parent - mean[p];
      ++out.pairs;
      if (std::isfinite(gap)) out.worst = out.pairs == 1 ? gap : std::max(out.worst, gap);
      if (gap > tol * std::max(1.0, std::abs(mean[p]))) ++out.violations;
    }
    fine = coarse;
  }
  return out;
}

}  // namespace hivelab
