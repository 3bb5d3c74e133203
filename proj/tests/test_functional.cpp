#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hivelab/errors.hpp"
#include "hivelab/functional.hpp"
#include "hivelab/polytope.hpp"

using namespace hivelab;

namespace {

// f = geometric mean: concave and 1-homogeneous, so σ = -ln f is convex.
double geo_sigma(const Slopes& s) { return -std::log(std::cbrt(s[0] * s[1] * s[2])); }

const SigmaTable& geo_table() {
  static const SigmaTable t = SigmaTable::from_function(SigmaGridSpec{}, geo_sigma, 0.0);
  return t;
}

// A smooth hive with a Hessian that is affine in (x, y).
ContinuumHive skewed_hive() {
  return ContinuumHive::analytic(
      [](double x, double y) { return -(x * x + y * y - x * y) + y + 0.05 * x * y * (y - x); });
}

// Operator values of skewed_hive at (x, y): Square, HorizontalEdge, VerticalEdge.
std::array<double, 3> skewed_operators(double x, double y) {
  const double hxx = -2.0 - 0.1 * y, hyy = -2.0 + 0.1 * x, hxy = 1.0 + 0.1 * (y - x);
  return {-hxy, hxy + hyy, hxx + hxy};
}

std::array<double, 2> centroid(const DyadicCell& c) {
  const double s = std::ldexp(1.0, -c.level);
  if (c.shape == CellShape::Triangle) return {(c.X + 1.0 / 3.0) * s, (c.Y + 2.0 / 3.0) * s};
  return {(c.X + 0.5) * s, (c.Y + 0.5) * s};
}

double golden_section(const std::function<double(double)>& f, double lo, double hi) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > 1e-12) {
    if (fc < fd) {
      b = d; d = c; fd = fc; c = b - r * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd; d = a + r * (b - a); fd = f(d);
    }
  }
  return std::min({f(a), f(b), f(0.5 * (a + b))});
}

// Bounds on a single coordinate from rows that only involve it.
std::pair<double, double> interval_1d(const LinearInequalitySystem& sys) {
  double lo = -1e300, hi = 1e300;
  for (const auto& r : sys.inequalities()) {
    REQUIRE(r.terms.size() == 1);
    const double c = r.terms[0].second;
    if (c > 0) hi = std::min(hi, r.rhs / c);
    else lo = std::max(lo, r.rhs / c);
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("flux masses of a constant Hessian hive are exact at every level") {
  for (double c : {0.5, 1.0, 2.5}) {
    const auto h = constant_hessian_hive(c);
    for (int a = 0; a <= 5; ++a) {
      const CellMasses m = continuum_cell_masses(h, a);
      CHECK(m.level == a);
      CHECK(m.cells.size() == dyadic_partition(a).size());
      for (const auto& cm : m.mass)
        for (double v : cm) CHECK(v == doctest::Approx(-c).epsilon(1e-7));
    }
  }
}

TEST_CASE("flux masses match the centroid value of an affine Hessian") {
  const auto h = skewed_hive();
  for (int a : {0, 2, 4, 5}) {
    const CellMasses m = continuum_cell_masses(h, a);
    for (std::size_t c = 0; c < m.cells.size(); ++c) {
      const auto p = centroid(m.cells[c]);
      const auto want = skewed_operators(p[0], p[1]);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(m.mass[c][i] - want[i]) < 1e-7);
    }
  }
}

TEST_CASE("flux masses agree with lifted discrete masses at fine n") {
  const auto h = skewed_hive();
  const int n = 256;
  const CellMasses d = all_cell_masses(lift(h, n), 2);
  const CellMasses c = continuum_cell_masses(h, 2);
  for (std::size_t k = 0; k < c.cells.size(); ++k)
    for (int i = 0; i < 3; ++i) {
      const double expect = c.mass[k][i] * d.rhombus_count[k][i] / (double(n) * n * c.cells[k].area());
      CHECK(std::abs(d.mass[k][i] - expect) < 1e-3);
    }
}

TEST_CASE("coarsen averages children by area") {
  const CellMasses fine = continuum_cell_masses(skewed_hive(), 3);
  const CellMasses coarse = coarsen(fine);
  CHECK(coarse.level == 2);
  for (std::size_t p = 0; p < coarse.cells.size(); ++p) {
    std::array<double, 3> acc{};
    double area = 0.0;
    for (const auto& ch : coarse.cells[p].children()) {
      const std::size_t k = cell_position(ch);
      for (int i = 0; i < 3; ++i) acc[i] += ch.area() * fine.mass[k][i];
      area += ch.area();
    }
    CHECK(area == doctest::Approx(coarse.cells[p].area()));
    for (int i = 0; i < 3; ++i) CHECK(coarse.mass[p][i] == doctest::Approx(acc[i] / area));
  }
  CHECK_THROWS_AS(coarsen(continuum_cell_masses(skewed_hive(), 0)), DomainError);
}

TEST_CASE("J_a of constant Hessian hives is level independent and exact") {
  for (double c : {0.5, 1.0, 2.0, 3.0}) {
    const auto h = constant_hessian_hive(c);
    CHECK(diagonal_log_v(h) == doctest::Approx(std::log(2.0 * c)).epsilon(1e-4));
    for (auto mode : {SigmaInterpolation::Trilinear, SigmaInterpolation::ConcaveEnvelope}) {
      const double sig = geo_table().interpolate({c, c, c}, mode);
      CHECK(sig == doctest::Approx(-std::log(c)).epsilon(1e-9));
      for (int a = 0; a <= 4; ++a) {
        const JaValue j = J_a(h, a, geo_table(), mode);
        CHECK(j.flagged.empty());
        CHECK(j.log_value == doctest::Approx(j.log_v - 0.5 * sig).epsilon(1e-9));
      }
      const FunctionalReport r = J_limit(h, 4, geo_table(), mode);
      CHECK(r.converged);
      CHECK(r.converged_at == 1);
      CHECK_FALSE(r.divergent);
      CHECK(r.sequence.size() == 5);
    }
  }
}

TEST_CASE("discrete J_a uses the finite-n Vandermonde term") {
  const double c = 1.0;
  for (int n : {5, 8, 16}) {
    const DiscreteHive h = lift(constant_hessian_hive(c), n);
    const JaValue j = J_a(h, 1, geo_table(), SigmaInterpolation::Trilinear);
    CHECK(j.log_v == doctest::Approx((n - 1.0) / n * std::log(2.0 * c)).epsilon(1e-12));
    CHECK(std::isfinite(j.log_value));
  }
}

TEST_CASE("zero Hessian gives J = 0 with every cell flagged") {
  const auto h = ContinuumHive::analytic([](double x, double y) { return 0.3 * x - 0.2 * y; });
  const JaValue j = J_a(h, 2, geo_table());
  CHECK(j.log_value == -kInfinity);
  CHECK(j.flagged.size() == 3 * dyadic_partition(2).size());
  const FunctionalReport r = J_limit(h, 2, geo_table());
  CHECK(r.divergent);
}

TEST_CASE("J_a is nonincreasing in a for a convex table and a kinked Hessian converges slowly") {
  // Extra -1 on ∂xx for x > 1/3: the VerticalEdge operator jumps across a non-dyadic line.
  const auto kinked = ContinuumHive::analytic([](double x, double y) {
    const double k = std::max(0.0, x - 1.0 / 3.0);
    return -(x * x + y * y - x * y) + y - 0.5 * k * k;
  });
  const FunctionalReport r = J_limit(kinked, 6, geo_table(), SigmaInterpolation::ConcaveEnvelope);
  for (std::size_t a = 1; a < r.sequence.size(); ++a)
    CHECK(r.sequence[a].log_value <= r.sequence[a - 1].log_value + 1e-12);
  CHECK_FALSE(r.converged);
  CHECK(r.gaps.back() < r.gaps[1]);
  const FunctionalReport smooth = J_limit(constant_hessian_hive(1.0), 6, geo_table(), SigmaInterpolation::ConcaveEnvelope);
  CHECK(smooth.converged);
}

TEST_CASE("Jensen cell inequality on mollified sampled hives") {
  const SpectrumVec l{4, 2, 0, -2, -4};
  const auto sys = build_hive_polytope(l, l, l);
  const auto ip = interior_point(sys);
  const auto stream = hit_and_run(sys, ip.x, 400, 11, {DirectionMode::Isotropic, 100, 100});
  REQUIRE(stream.samples.size() >= 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const DiscreteHive d = hive_from_coordinates(sys, l, l, l, stream.samples[k]);
    const ContinuumHive h = mollify(ContinuumHive::from_discrete(d), 0.05);
    const CellMasses m = continuum_cell_masses(h, 4);
    for (const auto& cm : m.mass)
      for (double v : cm) CHECK(v < 0.0);
    const JensenCheck jc = jensen_cells(m, geo_table());
    CHECK(jc.pairs == 1 + 3 + 10 + 36);
    CHECK(jc.violations == 0);
    const FunctionalReport r = J_limit(h, 4, geo_table(), SigmaInterpolation::ConcaveEnvelope);
    for (std::size_t a = 1; a < r.sequence.size(); ++a)
      CHECK(r.sequence[a].log_value <= r.sequence[a - 1].log_value + 1e-12);
  }
}

TEST_CASE("I1 on the constant Hessian family") {
  // I1 = ln(2c) + σ(c,c,c)/2 = ln 2 + (1/2) ln c for the geometric-mean table.
  for (double c : {0.5, 1.0, 2.0}) {
    const double v = I1(constant_hessian_hive(c), 2, geo_table());
    CHECK(v == doctest::Approx(std::log(2.0) + 0.5 * std::log(c)).epsilon(1e-4));
  }
  // Zero diagonal profile: V(ν) = 0.
  const auto flat_diag = ContinuumHive::analytic([](double x, double y) { return -(y - x) * (y - x); });
  const FunctionalReport r = J_limit(flat_diag, 1, geo_table(), SigmaInterpolation::ConcaveEnvelope);
  CHECK(r.value == -kInfinity);
  CHECK(I1(r, 0.0, 0.0) == kInfinity);
}

TEST_CASE("FunctionalReport JSON carries the sequence and table version") {
  const FunctionalReport r = J_limit(constant_hessian_hive(1.0), 3, geo_table());
  const auto j = r.to_json();
  CHECK(j["sequence"].size() == 4);
  CHECK(j["sigma_version"] == geo_table().version());
  CHECK(j["converged"] == true);
  CHECK(j["mass_floor"] == kMassFloor);
}

TEST_CASE("optimizer matches a golden-section scan at n = 3") {
  const SpectrumVec l{2, 0, -2}, m{3, -1, -2}, v{3, 0, -3};
  for (auto [lam, mu, nu] : {std::tuple{l, l, l}, std::tuple{l, m, v}}) {
    const auto sys = build_hive_polytope(lam, mu, nu);
    REQUIRE(sys.dimension() == 1);
    const auto [lo, hi] = interval_1d(sys);
    auto f = [&](double x) {
      Eigen::VectorXd c(1);
      c(0) = x;
      return hive_sigma_objective(hive_from_coordinates(sys, lam, mu, nu, c), 1, geo_table(),
                                  SigmaInterpolation::ConcaveEnvelope);
    };
    const double oracle = golden_section(f, lo, hi);
    const MinimizeResult r = minimize_sigma_integral(lam, mu, nu, geo_table());
    CHECK(std::abs(r.objective - oracle) < 1e-6);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
  }
}

TEST_CASE("optimizer matches a refined grid search at n = 4") {
  const SpectrumVec l{3, 1, -1, -3}, m{4, 0, -1, -3}, v{5, 1, -2, -4};
  const auto sys = build_hive_polytope(l, m, v);
  REQUIRE(sys.dimension() == 3);
  auto f = [&](const Eigen::VectorXd& x) {
    if (sys.max_violation(x) > 0.0) return kInfinity;
    return hive_sigma_objective(hive_from_coordinates(sys, l, m, v, x), 1, geo_table(),
                                SigmaInterpolation::ConcaveEnvelope);
  };
  const auto body = reduce(sys);
  auto [blo, bhi] = bounding_box(body);
  Eigen::VectorXd lo = blo, hi = bhi;
  double best = kInfinity;
  Eigen::VectorXd best_y = 0.5 * (lo + hi);
  const int g = 24;
  for (int round = 0; round < 10; ++round) {
    for (int i = 0; i <= g; ++i)
      for (int j = 0; j <= g; ++j)
        for (int k = 0; k <= g; ++k) {
          Eigen::VectorXd y(3);
          y << lo(0) + (hi(0) - lo(0)) * i / g, lo(1) + (hi(1) - lo(1)) * j / g, lo(2) + (hi(2) - lo(2)) * k / g;
          const double val = f(body.lift(y));
          if (val < best) {
            best = val;
            best_y = y;
          }
        }
    const Eigen::VectorXd half = 0.25 * (hi - lo);
    lo = (best_y - half).cwiseMax(blo);
    hi = (best_y + half).cwiseMin(bhi);
  }
  const MinimizeResult r = minimize_sigma_integral(l, m, v, geo_table());
  CHECK(std::abs(r.objective - best) < 1e-3);
}

TEST_CASE("optimizer reaches the constant Hessian objective") {
  for (int n : {4, 6}) {
    const SpectrumVec l = discretize(BoundaryProfile::quadratic(1.0), n);
    const DiscreteHive h = lift(constant_hessian_hive(1.0), n);
    const double candidate = hive_sigma_objective(h, 1, geo_table(), SigmaInterpolation::ConcaveEnvelope);
    const MinimizeResult r = minimize_sigma_integral(l, l, l, geo_table());
    CHECK(r.objective <= candidate + 1e-4);
    CHECK(validate_hive(r.hive, l, l, l, 1e-6).pass);
  }
}

TEST_CASE("rate_I: infeasible triple, finite value, homogeneity") {
  const SpectrumVec l{2, 0, -2};
  const RateResult bad = rate_I(l, l, SpectrumVec{9, 0, -9}, geo_table());
  CHECK(bad.infeasible);
  CHECK(bad.value == kInfinity);

  const int n = 4;
  const auto q = BoundaryProfile::quadratic(1.0);
  const RateResult r1 = rate_I(q, q, q, n, geo_table());
  CHECK_FALSE(r1.infeasible);
  CHECK(std::isfinite(r1.value));
  CHECK(r1.minimizer.hive.n() == n);

  // Scaling every profile by t shifts I by ((n-1)/n - 1/2) ln t.
  const auto q2 = BoundaryProfile::quadratic(2.0);
  const RateResult r2 = rate_I(q2, q2, q2, n, geo_table());
  CHECK(r2.value - r1.value == doctest::Approx(((n - 1.0) / n - 0.5) * std::log(2.0)).epsilon(1e-5));
  const auto j = r1.to_json();
  CHECK(j.contains("minimizer"));
}

TEST_CASE("empty cells at small n are flagged in discrete J_a but borrowed by the objective") {
  const DiscreteHive h = lift(constant_hessian_hive(1.0), 4);
  const JaValue j = J_a(h, 1, geo_table(), SigmaInterpolation::ConcaveEnvelope);
  CHECK(j.log_value == -kInfinity);
  CHECK_FALSE(j.flagged.empty());
  CHECK(std::isfinite(hive_sigma_objective(h, 1, geo_table(), SigmaInterpolation::ConcaveEnvelope)));
  CHECK_THROWS_AS(hive_sigma_objective(lift(constant_hessian_hive(1.0), 1), 1, geo_table(),
                                       SigmaInterpolation::ConcaveEnvelope),
                  DomainError);
}

TEST_CASE("stall rule stops the optimizer") {
  const SpectrumVec l{3, 1, -1, -3}, m{4, 0, -1, -3}, v{5, 1, -2, -4};
  MinimizeOptions o;
  o.stall_window = 1;
  o.stall_rtol = 1e6;
  const MinimizeResult r = minimize_sigma_integral(l, m, v, geo_table(), o);
  CHECK(r.stalled);
  CHECK(r.iterations == 1);
  CHECK_THROWS_AS(minimize_sigma_integral(l, m, SpectrumVec{20, 0, 0, -20}, geo_table()), InfeasibleError);
}
