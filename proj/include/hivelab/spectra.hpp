#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace hivelab {

// Nonincreasing, zero-sum real vector.
using SpectrumVec = std::vector<double>;

// Throws DomainError unless v is nonincreasing with |Σv| <= 1e-9 * n * scale.
void validate_spectrum(std::span<const double> v, const std::string& what = "spectrum");
bool is_spectrum(std::span<const double> v);

// Shift v to zero sum; returns the shift that was subtracted.
double center_in_place(std::vector<double>& v);

SpectrumVec parse_spectrum(const std::string& csv);

struct ProfileCheck {
  bool ok = true;
  bool endpoints_zero = true;
  bool concave = true;
  double lipschitz = 0.0;
  std::string message;
};

// Concave boundary function on [0, 1] with zero endpoints (α, β or γ).
class BoundaryProfile {
 public:
  // scale * (t - t^2)
  static BoundaryProfile quadratic(double scale = 1.0);
  // Values at m + 1 equispaced knots on [0, 1].
  static BoundaryProfile piecewise_linear(std::vector<double> knots);
  // Closed form; derivative defaults to a one-sided difference.
  static BoundaryProfile closed_form(std::function<double(double)> value,
                                     std::function<double(double)> left_derivative = {},
                                     std::string label = "closed-form");
  // {"kind": "quadratic", "scale": c} or {"kind": "pwl", "knots": [...]}
  static BoundaryProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  double operator()(double t) const;
  // Left derivative ∂⁻α(t); at t = 0 the right derivative.
  double left_derivative(double t) const;
  BoundaryProfile scaled(double factor) const;

  bool is_piecewise_linear() const { return !knots_.empty(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::string& label() const { return label_; }

  // Endpoints, concavity (midpoint test on the knots, or on 2^14 samples of a
  // closed form) and a finite Lipschitz bound.
  ProfileCheck validate(double tol = 1e-10) const;

 private:
  std::function<double(double)> value_;
  std::function<double(double)> derivative_;
  std::vector<double> knots_;
  std::string label_;
  double quadratic_scale_ = 0.0;
  bool is_quadratic_ = false;
};

// λ_n(i) = n^2 (α(i/n) - α((i-1)/n)), i = 1..n.
SpectrumVec discretize(const BoundaryProfile& profile, int n);

// ((n-1)/2, (n-3)/2, ..., -(n-1)/2)
SpectrumVec tau(int n);

enum class SeminormMode { SortedPrefix, AntiderivativeSup };
SeminormMode parse_seminorm_mode(const std::string& s);
std::string to_string(SeminormMode m);

double seminorm_I(std::span<const double> v, SeminormMode mode);

// sign * Σ_{j <= prefix} v_j <= rhs
struct PrefixConstraint {
  int prefix = 1;
  double sign = 1.0;
  double rhs = 0.0;
  std::vector<double> coefficients(int n) const;
};

// |Σ_{k<=i} (v_k - center_k)| <= radius for i = 1..n-1, as 2(n-1) half-spaces.
std::vector<PrefixConstraint> ball_constraints_I(std::span<const double> center, double radius);

}  // namespace hivelab
