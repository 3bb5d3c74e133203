#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hivelab/spectra.hpp"

namespace hivelab {

// Log-domain value; degenerate = ties, value = -inf.
struct LogValue {
  double value = 0.0;
  bool degenerate = false;
};

// Σ_{i<j} log(v_i - v_j). Throws DomainError if some v_i < v_j with i < j.
LogValue log_vandermonde(std::span<const double> v);

// Σ_{i<j} log((v_i - v_j)/(j - i)) = log V(v) - log V(τ_n).
LogValue log_ratio_to_tau(std::span<const double> v);

// log volume of the GT polytope with top row ν (equals log_ratio_to_tau).
LogValue gt_log_volume(std::span<const double> nu);

// Right-hand side of C(n,2) log(ν_1 - ν_n) - Σ_k k log(k ⌊(n-1)/k⌋).
double log_ratio_upper_bound(std::span<const double> nu);

// C(n,2) log n - (3/4) n^2.
double log_vandermonde_tau_lower_bound(int n);

struct ContinuumLogV {
  double value = 0.0;
  bool divergent = false;
  std::vector<double> band_widths;    // δ values used
  std::vector<double> band_values;    // truncated integrals at each δ
};

// 2 ∬_{0<=x<=y<=1, y-x>=δ} log(|λ(x) - λ(y)| / |x - y|), extrapolated δ -> 0.
ContinuumLogV continuum_logV(const std::function<double(double)>& lambda);
ContinuumLogV continuum_logV(const BoundaryProfile& alpha);

}  // namespace hivelab
