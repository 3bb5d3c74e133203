#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hivelab/polytope.hpp"

namespace hivelab {

using Slopes = std::array<double, 3>;

struct FnEstimate {
  int n = 0;
  double value = 0.0;       // f_n(s)
  double std_error = 0.0;
  double log_volume = 0.0;  // log |P_n(s)|
  double log_std_error = 0.0;
  VolumeMethod method = VolumeMethod::Rejection;
  long samples = 0;
};

// f_n(s) = |P_n(s)|^{1/(n^2-1)}, where |P_n(s)| is the volume of the torus
// polytope with g(0) = 0 in the remaining n^2 - 1 coordinates.
FnEstimate f_n(const Slopes& s, int n, const VolumeOptions& options);

struct SigmaEstimate {
  double sigma = 0.0;
  double std_error = 0.0;
  double f = 0.0;           // pooled f
  std::vector<FnEstimate> per_n;
};

// -ln of the inverse-variance weighted f_n over n_list; the spread of the
// f_n around the pooled value is added in quadrature to the stderr.
SigmaEstimate sigma_estimate(const Slopes& s, const std::vector<int>& n_list, const VolumeOptions& options);

// -ln(e (s0 + s1) / π · sin(π s0 / (s0 + s1)))
double conjectured_sigma_limit(double s0, double s1);

struct ConjectureRow {
  double s2 = 0.0;
  double sigma = 0.0;
  double std_error = 0.0;
  double conjectured = 0.0;
  double gap = 0.0;         // sigma - conjectured
};

struct ConjectureReport {
  std::vector<ConjectureRow> rows;
  bool gap_monotone = false;  // |gap| nonincreasing along s2
};

ConjectureReport conjecture_gap(double s0, double s1, const std::vector<double>& s2_list,
                                const std::vector<int>& n_list, const VolumeOptions& options);

struct SigmaGridSpec {
  double lo = 0.25;
  double hi = 4.0;
  int points = 5;             // per axis, log-spaced
  std::vector<int> n_list{2, 3, 4};
};

enum class SigmaInterpolation {
  Trilinear,        // trilinear in log s, extended by homogeneity
  ConcaveEnvelope,  // -ln of the least concave 1-homogeneous majorant of the node values of f
};

// σ on a log-spaced grid in each coordinate. Node (i, j, k) sits at
// (g_i, g_j, g_k). Nodes that differ by a common index shift are related by
// σ(r s) = σ(s) - ln r, so only nodes with min index 0 are estimated.
class SigmaTable {
 public:
  static SigmaTable build(const SigmaGridSpec& spec, const VolumeOptions& options,
                          const std::function<void(int, int)>& progress = {});
  // Table from a known function (σ, stderr); used for tests and synthetic runs.
  static SigmaTable from_function(const SigmaGridSpec& spec, const std::function<double(const Slopes&)>& sigma,
                                  double std_error = 0.0);

  static SigmaTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static SigmaTable load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<int>& n_list() const { return n_list_; }
  int points() const { return static_cast<int>(grid_.size()); }
  double node_sigma(int i, int j, int k) const { return sigma_[flat(i, j, k)]; }
  double node_stderr(int i, int j, int k) const { return stderr_[flat(i, j, k)]; }
  double max_stderr() const;
  // Short identifier derived from the contents.
  std::string version() const;

  // Throws DomainError if s is outside the homogeneity reach (trilinear) or
  // not strictly positive.
  double interpolate(const Slopes& s, SigmaInterpolation mode = SigmaInterpolation::Trilinear) const;
  // Envelope mode only: a subgradient of σ at s (σ = +inf gives an empty optional-like NaN vector).
  Eigen::Vector3d envelope_gradient(const Slopes& s) const;

  struct ConvexityCertificate {
    int nodes = 0;
    int violations = 0;        // nodes more than 3 stderr below the envelope of f
    double worst_gap = 0.0;    // largest (envelope - f) / f over nodes
  };
  ConvexityCertificate certify_convexity() const;

  // σ nonincreasing along each axis: count of node pairs violating by more than 3 stderr.
  int monotonicity_violations() const;

 private:
  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * grid_.size() + j) * grid_.size() + k;
  }
  void fill_by_homogeneity();
  void build_envelope();
  double envelope_f(const Slopes& s, int* facet = nullptr) const;

  std::vector<double> grid_;
  std::vector<double> sigma_;
  std::vector<double> stderr_;
  std::vector<int> n_list_;
  long budget_ = 0;
  std::vector<Eigen::Vector3d> planes_;  // f̂(s) = min_k planes_[k] · s
};

}  // namespace hivelab
