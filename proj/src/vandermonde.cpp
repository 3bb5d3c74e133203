#include "hivelab/vandermonde.hpp"

#include <cmath>
#include <limits>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"

namespace hivelab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

LogValue pair_sum(std::span<const double> v, bool divide_by_gap) {
  double scale = 1.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  LogValue out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      const double d = v[i] - v[j];
      if (d < -1e-12 * scale) throw DomainError("Vandermonde: entries must be decreasing");
      if (d <= 1e-14 * scale) {
        out.degenerate = true;
        out.value = kNegInf;
        return out;
      }
      out.value += std::log(divide_by_gap ? d / static_cast<double>(j - i) : d);
    }
  }
  return out;
}

}  // namespace

LogValue log_vandermonde(std::span<const double> v) { return pair_sum(v, false); }

LogValue log_ratio_to_tau(std::span<const double> v) { return pair_sum(v, true); }

LogValue gt_log_volume(std::span<const double> nu) { return log_ratio_to_tau(nu); }

double log_ratio_upper_bound(std::span<const double> nu) {
  const int n = static_cast<int>(nu.size());
  if (n < 2) return 0.0;
  double rhs = 0.5 * n * (n - 1) * std::log(nu.front() - nu.back());
  for (int k = 1; k <= n - 1; ++k) rhs -= k * std::log(static_cast<double>(k * ((n - 1) / k)));
  return rhs;
}

double log_vandermonde_tau_lower_bound(int n) {
  return 0.5 * n * (n - 1) * std::log(static_cast<double>(n)) - 0.75 * n * n;
}

ContinuumLogV continuum_logV(const std::function<double(double)>& lambda) {
  // Substitute y = x + u: 2 ∫_δ^1 du ∫_0^{1-u} log(|λ(x) - λ(x+u)| / u) dx.
  // Panels [2^{-j-1}, 2^{-j}] in u so every δ = 2^{-k} reuses earlier panels.
  constexpr int kFinest = 12;
  constexpr int kCoarsest = 6;
  const GaussRule& rule = gauss_legendre(20);
  ContinuumLogV out;
  bool diverged = false;
  auto inner = [&](double u) {
    const double len = 1.0 - u;
    double s = 0.0;
    constexpr int pieces = 4;
    for (int p = 0; p < pieces; ++p) {
      const double a = len * p / pieces, b = len * (p + 1) / pieces;
      const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
      double t = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double x = mid + half * rule.nodes[i];
        const double gap = std::abs(lambda(x) - lambda(x + u));
        if (!(gap > 0.0) || !std::isfinite(gap)) {
          diverged = true;
          return 0.0;
        }
        t += rule.weights[i] * std::log(gap / u);
      }
      s += half * t;
    }
    return s;
  };
  std::vector<double> panel(kFinest, 0.0);
  for (int j = 0; j < kFinest && !diverged; ++j) {
    const double hi = std::ldexp(1.0, -j), lo = std::ldexp(1.0, -j - 1);
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * inner(mid + half * rule.nodes[i]);
    panel[j] = 2.0 * half * s;
  }
  if (diverged) {
    out.divergent = true;
    out.value = kNegInf;
    return out;
  }
  // Truncated integrals I(δ_k), δ_k = 2^{-k}, k = 6..12.
  std::vector<double> table;
  for (int k = kCoarsest; k <= kFinest; ++k) {
    double s = 0.0;
    for (int j = 0; j < k; ++j) s += panel[j];
    out.band_widths.push_back(std::ldexp(1.0, -k));
    out.band_values.push_back(s);
    table.push_back(s);
  }
  // Richardson in δ with ratio 2, error expansion in integer powers of δ.
  for (int level = 1; level < static_cast<int>(table.size()); ++level) {
    const double f = std::ldexp(1.0, level);
    for (std::size_t i = 0; i + level < out.band_values.size(); ++i)
      table[i] = (f * table[i + 1] - table[i]) / (f - 1.0);
  }
  out.value = table[0];
  if (!std::isfinite(out.value)) {
    out.divergent = true;
    out.value = kNegInf;
  }
  return out;
}

ContinuumLogV continuum_logV(const BoundaryProfile& alpha) {
  return continuum_logV([&alpha](double t) { return alpha.left_derivative(t); });
}

}  // namespace hivelab
