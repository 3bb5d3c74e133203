#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hivelab/hive.hpp"
#include "hivelab/lattice.hpp"
#include "hivelab/spectra.hpp"
#include "hivelab/surface_tension.hpp"

namespace hivelab {

inline constexpr double kMassFloor = 1e-6;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Cell average of the rhombus operator of each kind for a continuum hive,
// same sign convention as all_cell_masses (negative where concave):
//   Square: -∂x∂y h,  HorizontalEdge: ∂y(∂x+∂y) h,  VerticalEdge: ∂x(∂x+∂y) h.
// Computed through the divergence theorem on cell boundaries at level
// max(a, 4) and averaged up, so parents are exact area averages of children.
CellMasses continuum_cell_masses(const ContinuumHive& h, int a);

// Area-weighted averages one level up.
CellMasses coarsen(const CellMasses& fine);

struct CellFlag {
  DyadicCell cell;
  int kind = 0;
  double mass = 0.0;  // σ argument, i.e. the negated cell mass
};

// Σ_κ |κ| σ(-mass_κ). Cells whose argument falls at or below `floor` are
// flagged and make the sum +inf unless clamp is set, in which case the
// argument is raised to the floor.
double sigma_integral(const CellMasses& masses, const SigmaTable& table, SigmaInterpolation mode,
                      double floor = kMassFloor, bool clamp = false, std::vector<CellFlag>* flagged = nullptr);

struct JaValue {
  int level = 0;
  double log_value = 0.0;       // log V(ν) - Σ|κ|σ
  double log_v = 0.0;
  double sigma_integral = 0.0;
  std::vector<CellFlag> flagged;
};

// log V of the diagonal profile t -> h(t, t) (continuum convention).
double diagonal_log_v(const ContinuumHive& h);

// Discrete hives use (2/n^2) log_ratio_to_tau of the diagonal spectrum.
JaValue J_a(const DiscreteHive& h, int a, const SigmaTable& table,
            SigmaInterpolation mode = SigmaInterpolation::Trilinear);
JaValue J_a(const ContinuumHive& h, int a, const SigmaTable& table,
            SigmaInterpolation mode = SigmaInterpolation::Trilinear);

struct FunctionalReport {
  double value = 0.0;                // log J at the last level
  std::vector<JaValue> sequence;     // levels 0..a_max
  std::vector<double> gaps;          // |log J_a - log J_{a-1}|, a >= 1
  bool converged = false;            // last gap < rtol
  int converged_at = -1;             // first a after which every gap < rtol
  bool divergent = false;            // non-finite terms or gaps that grow at the end
  std::string sigma_version;
  double mass_floor = kMassFloor;
  nlohmann::json to_json() const;
};

FunctionalReport J_limit(const ContinuumHive& h, int a_max, const SigmaTable& table,
                         SigmaInterpolation mode = SigmaInterpolation::Trilinear, double rtol = 1e-6);
FunctionalReport J_limit(const DiscreteHive& h, int a_max, const SigmaTable& table,
                         SigmaInterpolation mode = SigmaInterpolation::Trilinear, double rtol = 1e-6);

// -log J + log V(λ) + log V(μ); +inf when J = 0 or a boundary profile is degenerate.
double I1(const FunctionalReport& j, double log_v_lambda, double log_v_mu);
double I1(const ContinuumHive& h, int a_max, const SigmaTable& table,
          SigmaInterpolation mode = SigmaInterpolation::Trilinear);

// Σ_κ |κ| σ(max(-mass, floor)) for the level-a partition of a discrete hive.
// A cell with no rhombus of some kind anchored in it uses the mass of its
// nearest ancestor that has one, so small n still gives a usable objective.
double hive_sigma_objective(const DiscreteHive& h, int a, const SigmaTable& table, SigmaInterpolation mode,
                            double floor = kMassFloor);

struct MinimizeOptions {
  int level = 1;
  int iterations = 2000;
  SigmaInterpolation mode = SigmaInterpolation::ConcaveEnvelope;
  double floor = kMassFloor;
  double projection_tol = 1e-8;
  int stall_window = 50;
  double stall_rtol = 1e-6;
  double min_step = 1e-10;
};

struct MinimizeResult {
  DiscreteHive hive;
  double objective = kInfinity;
  std::vector<double> trace;   // objective after each accepted step
  int iterations = 0;
  bool converged = false;      // step shrank below min_step
  bool stalled = false;
  nlohmann::json to_json() const;
};

// Projected subgradient descent of hive_sigma_objective over the hive
// polytope of (λ, μ, ν). Throws InfeasibleError when no hive exists.
MinimizeResult minimize_sigma_integral(std::span<const double> lambda, std::span<const double> mu,
                                       std::span<const double> nu, const SigmaTable& table,
                                       const MinimizeOptions& options = {});

struct RateResult {
  double value = kInfinity;
  double log_v_lambda = 0.0;
  double log_v_mu = 0.0;
  double log_v_nu = 0.0;
  double sigma_integral = kInfinity;
  bool infeasible = false;
  MinimizeResult minimizer;
  nlohmann::json to_json() const;
};

// log V(λ) + log V(μ) - log V(ν) + min ∫σ, all at size n with (2/n^2) log_ratio_to_tau.
RateResult rate_I(std::span<const double> lambda, std::span<const double> mu, std::span<const double> nu,
                  const SigmaTable& table, const MinimizeOptions& options = {});
RateResult rate_I(const BoundaryProfile& alpha, const BoundaryProfile& beta, const BoundaryProfile& gamma, int n,
                  const SigmaTable& table, const MinimizeOptions& options = {});

struct JensenCheck {
  int pairs = 0;
  int violations = 0;
  double worst = 0.0;  // largest σ(parent) - mean σ(children)
};

// σ(parent) <= area-weighted mean of σ(children) on every parent/child pair
// from level 1 up to masses.level.
JensenCheck jensen_cells(const CellMasses& masses, const SigmaTable& table,
                         SigmaInterpolation mode = SigmaInterpolation::ConcaveEnvelope, double tol = 1e-9);

}  // namespace hivelab
