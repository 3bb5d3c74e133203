#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hivelab/hive.hpp"
#include "hivelab/lattice.hpp"
#include "hivelab/spectra.hpp"

namespace hivelab {

struct SparseRow {
  std::vector<std::pair<int, double>> terms;  // (coordinate, coefficient)
  double rhs = 0.0;
};

// A x <= b together with equality rows E x = f over `dimension()` coordinates.
class LinearInequalitySystem {
 public:
  explicit LinearInequalitySystem(int dimension = 0);

  int dimension() const { return dim_; }
  int add_coordinate(std::string name, std::optional<GridPoint> point = std::nullopt);

  // Terms on the same coordinate are merged; rows whose terms all cancel are
  // checked against 0 <= rhs and recorded as constant violations if false.
  void add_inequality(std::vector<std::pair<int, double>> terms, double rhs);
  void add_equality(std::vector<std::pair<int, double>> terms, double rhs);

  const std::vector<SparseRow>& inequalities() const { return rows_; }
  const std::vector<SparseRow>& equalities() const { return equalities_; }
  const std::string& name(int coord) const { return names_.at(coord); }
  const std::optional<GridPoint>& point(int coord) const { return points_.at(coord); }
  std::optional<int> coordinate_of(GridPoint p) const;
  int constant_violations() const { return constant_violations_; }

  // Dense views.
  Eigen::MatrixXd inequality_matrix() const;
  Eigen::VectorXd inequality_rhs() const;

  // Max violation of the inequality and equality rows at x (<= 0 means feasible).
  double max_violation(const Eigen::VectorXd& x) const;

  // One row per line: "<=" or "=", coefficients over all coordinates, rhs.
  std::string to_hrep() const;

 private:
  static std::vector<std::pair<int, double>> merge(std::vector<std::pair<int, double>> terms);
  int dim_;
  std::vector<SparseRow> rows_;
  std::vector<SparseRow> equalities_;
  std::vector<std::string> names_;
  std::vector<std::optional<GridPoint>> points_;
  int constant_violations_ = 0;
};

// x = origin + basis * y; inequalities A y <= b in reduced coordinates.
struct ReducedBody {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd origin;
  Eigen::MatrixXd basis;  // orthonormal columns spanning the equality null space
  bool infeasible_constant = false;
  int dim() const { return static_cast<int>(basis.cols()); }
  Eigen::VectorXd lift(const Eigen::VectorXd& y) const { return origin + basis * y; }
};

ReducedBody reduce(const LinearInequalitySystem& sys);

// ---- builders ----

// Free coordinates are the interior points of T_n; boundary values come from
// cumulative sums. One row Δ <= 0 per rhombus.
LinearInequalitySystem build_hive_polytope(std::span<const double> lambda, std::span<const double> mu,
                                           std::span<const double> nu);

// Field on T_n from boundary data plus a point of the hive polytope.
DiscreteHive hive_from_coordinates(const LinearInequalitySystem& sys, std::span<const double> lambda,
                                   std::span<const double> mu, std::span<const double> nu,
                                   const Eigen::VectorXd& x);

struct AugmentedBall {
  SpectrumVec center;
  double radius = 0.0;
};

// Free coordinates: diagonal values (k,k) for 0<k<n, hive interior, and GT
// points (x,y) with 1 <= y < x <= n. The optional ball adds 2(n-1) box rows on
// the diagonal values (they are the prefix sums of ν').
LinearInequalitySystem build_augmented_polytope(std::span<const double> lambda, std::span<const double> mu,
                                                const std::optional<AugmentedBall>& ball = std::nullopt);

AugmentedHive augmented_from_coordinates(const LinearInequalitySystem& sys, std::span<const double> lambda,
                                         std::span<const double> mu, const Eigen::VectorXd& x);

enum class TorusVariant { SumZero, Pinned };

// n^2 coordinates g(x, y) (index y*n + x); rows Δ_i g <= s_i for each kind and
// anchor. SumZero adds Σ g = 0, Pinned adds g(0,0) = 0.
LinearInequalitySystem build_torus_polytope(int n, std::array<double, 3> s, TorusVariant variant);

// GT polytope with fixed top row ν; coordinates are the lower rows.
LinearInequalitySystem build_gt_polytope(std::span<const double> nu);

// Pin coords[k] to values[k] ± slack (slack == 0: equality rows).
LinearInequalitySystem condition_on(const LinearInequalitySystem& sys, std::span<const int> coords,
                                    std::span<const double> values, double slack);

// ---- interior point ----

struct InteriorPoint {
  Eigen::VectorXd x;         // full coordinates
  Eigen::VectorXd y;         // reduced coordinates
  double margin = 0.0;       // min raw slack b - a·x over inequality rows
  double radius = 0.0;       // inscribed-ball radius (Chebyshev), reduced coordinates
  bool full_dimensional = true;
};

// Max-slack (Chebyshev) LP. Throws InfeasibleError when no point exists.
// A feasible system with zero inscribed radius is returned with
// full_dimensional = false.
InteriorPoint interior_point(const LinearInequalitySystem& sys, double tol = 1e-9);
InteriorPoint interior_point(const ReducedBody& body, double tol = 1e-9);

// Coordinate-wise bounds by LP; throws DomainError if unbounded.
std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box(const ReducedBody& body);

// ---- sampling ----

enum class DirectionMode { Isotropic, Coordinate };

struct HitAndRunOptions {
  DirectionMode directions = DirectionMode::Isotropic;
  int thin = 1;      // keep every thin-th state
  int burn_in = 0;   // discarded steps
};

struct SampleStream {
  std::vector<Eigen::VectorXd> samples;  // full coordinates
  long degenerate_chords = 0;
};

// Hit-and-run from a strictly interior start (full coordinates).
SampleStream hit_and_run(const LinearInequalitySystem& sys, const Eigen::VectorXd& start, long steps,
                         std::uint64_t seed, const HitAndRunOptions& options = {});

// Chain over {A y <= b} ∩ optional ball B(center, radius) in reduced coordinates.
class HitAndRunChain {
 public:
  HitAndRunChain(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, Eigen::VectorXd start, std::uint64_t seed,
                 DirectionMode mode);
  void set_ball(const Eigen::VectorXd& center, double radius);
  void step();
  const Eigen::VectorXd& state() const { return y_; }
  double ball_distance2() const;  // |y - center|^2
  long degenerate_chords() const { return degenerate_; }

 private:
  void refresh_slack();
  const Eigen::MatrixXd& A_;
  const Eigen::VectorXd& b_;
  Eigen::VectorXd y_;
  Eigen::VectorXd slack_;
  Eigen::VectorXd center_;
  double radius2_ = -1.0;
  std::mt19937_64 rng_;
  DirectionMode mode_;
  long steps_ = 0;
  long degenerate_ = 0;
};

// ---- volume ----

enum class VolumeMethod { Auto, Rejection, Annealed };
std::string to_string(VolumeMethod m);
VolumeMethod parse_volume_method(const std::string& s);

struct VolumeOptions {
  VolumeMethod method = VolumeMethod::Auto;
  long budget = 2'000'000;   // rejection samples, or total hit-and-run steps
  std::uint64_t seed = 1;
  int threads = 1;
  int chains = 16;           // independent chains; jackknife over chains gives stderr
  double phase_ratio = 0.75; // target volume ratio between consecutive phases
};

struct VolumeEstimate {
  double log_volume = 0.0;
  double std_error = 0.0;    // standard error of log_volume
  VolumeMethod method = VolumeMethod::Rejection;
  long samples = 0;
  int dimension = 0;
  int phases = 0;
  bool bound_only = false;   // rejection saw no hits: log_volume is an upper bound
  bool lower_dimensional = false;
  double volume() const;
  double volume_stderr() const;
};

// Volume of the system in its reduced (orthonormal) coordinates.
VolumeEstimate estimate_volume(const LinearInequalitySystem& sys, const VolumeOptions& options);
VolumeEstimate estimate_volume(const ReducedBody& body, const VolumeOptions& options);

}  // namespace hivelab
