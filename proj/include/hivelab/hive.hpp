#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hivelab/lattice.hpp"
#include "hivelab/spectra.hpp"

namespace hivelab {

// Values on T_n at the n^2 scale.
using DiscreteHive = TriangleField;

// A function on T = {0 <= x <= y <= 1}.
class ContinuumHive {
 public:
  struct Impl {
    virtual ~Impl() = default;
    virtual double eval(double x, double y) const = 0;
    // m > 0: piecewise linear on the (1,1)-triangulation of T_m; 0: smooth.
    virtual int breakpoint_resolution() const { return 0; }
  };

  ContinuumHive() = default;
  static ContinuumHive analytic(std::function<double(double, double)> f);
  // values[idx] at the point (x/m, y/m) of T_m, TriangleGrid ordering.
  static ContinuumHive piecewise_linear(int m, std::vector<double> values);
  // h(x, y) = h_n(nx, ny) / n^2, interpolated linearly on triangles.
  static ContinuumHive from_discrete(const DiscreteHive& h);

  double operator()(double x, double y) const { return impl_->eval(x, y); }
  int breakpoint_resolution() const { return impl_->breakpoint_resolution(); }
  // Sample onto T_m and return the piecewise-linear interpolant.
  ContinuumHive tabulate(int m) const;
  bool valid() const { return static_cast<bool>(impl_); }

 private:
  explicit ContinuumHive(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
  friend ContinuumHive mollify(const ContinuumHive& h, double eps, int quadrature_points);
};

// -(c (x^2 + y^2 - xy)) + c y: constant Hessian, zero corners, boundary
// profiles c (t - t^2) on all three sides.
ContinuumHive constant_hessian_hive(double c);

// Augmented hive on [0, n]^2 in (x, y) coordinates; x <= y is the hive part,
// x >= y holds the GT data, (x, 0) = 0.
// Matrix view (1-based): a_{ij} = value(x = n + 1 - i, y = j - 1); the first
// column is the zero line, the anti-diagonal i + j = n + 2 is the hive diagonal.
class AugmentedHive {
 public:
  explicit AugmentedHive(int n);
  int n() const { return n_; }
  double value(GridPoint p) const;
  double& value_ref(GridPoint p);
  double matrix(int i, int j) const;   // 1-based
  static GridPoint point_of_matrix(int n, int i, int j);
  static std::pair<int, int> matrix_of_point(int n, GridPoint p);
  DiscreteHive hive_part() const;
  nlohmann::json to_json() const;

 private:
  int n_;
  std::vector<double> values_;  // (n+1)^2, index y * (n+1) + x
};

// rows[k] has k + 1 entries; rows.back() is the top row (length n).
struct GTPattern {
  std::vector<std::vector<double>> rows;
  int n() const { return static_cast<int>(rows.size()); }
  bool interlaces(double tol = 1e-9) const;
  nlohmann::json to_json() const { return rows; }
};

struct BoundaryMismatch {
  std::string side;  // "lambda" | "mu" | "nu" | "corner"
  int k = 0;
  double expected = 0.0;
  double actual = 0.0;
};

struct HiveReport {
  bool pass = true;
  std::vector<BoundaryMismatch> boundary_failures;
  std::vector<RhombusViolation> violations;
};

// tol < 0: 1e-9 * max(1, max|h|) for boundary increments and 1e-12 * scale for rhombi.
HiveReport validate_hive(const DiscreteHive& h, std::span<const double> lambda, std::span<const double> mu,
                         std::span<const double> nu, double tol = -1.0);

DiscreteHive lift(const ContinuumHive& h, int n);

// Field on T_n whose boundary carries the cumulative sums of (λ, μ, ν); interior = 0.
DiscreteHive boundary_field(std::span<const double> lambda, std::span<const double> mu,
                            std::span<const double> nu);

struct HiveBoundary {
  SpectrumVec lambda, mu, nu;
};
HiveBoundary boundary_of(const DiscreteHive& h);

// Boundary profiles of a continuum hive: α(t) = h(0,t), β(t) = h(t,1) - h(0,1), γ(t) = h(t,t).
double profile_alpha(const ContinuumHive& h, double t);
double profile_beta(const ContinuumHive& h, double t);
double profile_gamma(const ContinuumHive& h, double t);

// GT entries are southwest differences value(x, y) - value(x-1, y-1) below the diagonal.
GTPattern extract_gt(const AugmentedHive& a, double tol = 1e-9);

// θ_ε(x, y) = ε^-2 θ(x/ε, y/ε), θ(x, y) = 630^2 x^4 (1-x)^4 y^4 (1-y)^4 on [0,1]^2.
double theta(double x, double y, double eps);
inline constexpr double kThetaNormalizer = 630.0 * 630.0;

// h_ε(x,y) = (h ⋆ θ_ε)((1-4ε)x + ε, (1-4ε)y + 3ε) - ε(x^2 + y^2 - xy) + affine,
// affine chosen so the three corners vanish. Evaluated lazily; for piecewise
// linear input the quadrature splits at the input's breaklines and is exact.
ContinuumHive mollify(const ContinuumHive& h, double eps, int quadrature_points = 30);

nlohmann::json hive_to_json(const DiscreteHive& h);
DiscreteHive hive_from_json(const nlohmann::json& j);

}  // namespace hivelab
