#include "hivelab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hivelab/errors.hpp"

namespace hivelab {

namespace {

double spectrum_scale(std::span<const double> v) {
  double s = 1.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

bool is_spectrum(std::span<const double> v) {
  const double scale = spectrum_scale(v);
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1] + 1e-12 * scale) return false;
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  return std::abs(sum) <= 1e-9 * std::max<std::size_t>(1, v.size()) * scale;
}

void validate_spectrum(std::span<const double> v, const std::string& what) {
  if (v.empty()) throw DomainError(what + ": empty vector");
  if (!is_spectrum(v)) throw DomainError(what + ": must be nonincreasing with zero sum");
}

double center_in_place(std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return mean;
}

SpectrumVec parse_spectrum(const std::string& csv) {
  SpectrumVec out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw DomainError("cannot parse number '" + item + "'");
    }
    if (used != item.size()) throw DomainError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw DomainError("empty vector '" + csv + "'");
  return out;
}

// ---- BoundaryProfile ----

BoundaryProfile BoundaryProfile::quadratic(double scale) {
  BoundaryProfile p;
  p.value_ = [scale](double t) { return scale * (t - t * t); };
  p.derivative_ = [scale](double t) { return scale * (1.0 - 2.0 * t); };
  p.label_ = "quadratic";
  p.quadratic_scale_ = scale;
  p.is_quadratic_ = true;
  return p;
}

BoundaryProfile BoundaryProfile::piecewise_linear(std::vector<double> knots) {
  if (knots.size() < 2) throw DomainError("piecewise-linear profile needs at least 2 knots");
  BoundaryProfile p;
  p.knots_ = std::move(knots);
  const auto k = p.knots_;
  const double m = static_cast<double>(k.size() - 1);
  p.value_ = [k, m](double t) {
    t = std::clamp(t, 0.0, 1.0);
    const double pos = t * m;
    std::size_t i = std::min(static_cast<std::size_t>(pos), k.size() - 2);
    const double w = pos - static_cast<double>(i);
    return (1.0 - w) * k[i] + w * k[i + 1];
  };
  p.derivative_ = [k, m](double t) {
    t = std::clamp(t, 0.0, 1.0);
    // segment ((j-1)/m, j/m] containing t; j >= 1
    std::size_t j = static_cast<std::size_t>(std::ceil(t * m));
    j = std::clamp<std::size_t>(j, 1, k.size() - 1);
    return m * (k[j] - k[j - 1]);
  };
  p.label_ = "pwl";
  return p;
}

BoundaryProfile BoundaryProfile::closed_form(std::function<double(double)> value,
                                             std::function<double(double)> left_derivative, std::string label) {
  BoundaryProfile p;
  p.value_ = std::move(value);
  if (left_derivative) {
    p.derivative_ = std::move(left_derivative);
  } else {
    auto f = p.value_;
    p.derivative_ = [f](double t) {
      const double h = 1e-6;
      if (t < h) return (f(t + h) - f(t)) / h;
      return (f(t) - f(t - h)) / h;
    };
  }
  p.label_ = std::move(label);
  return p;
}

BoundaryProfile BoundaryProfile::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "quadratic") return quadratic(j.value("scale", 1.0));
  if (kind == "pwl") return piecewise_linear(j.at("knots").get<std::vector<double>>());
  throw DomainError("unknown profile kind '" + kind + "'");
}

nlohmann::json BoundaryProfile::to_json() const {
  if (is_quadratic_) return {{"kind", "quadratic"}, {"scale", quadratic_scale_}};
  if (!knots_.empty()) return {{"kind", "pwl"}, {"knots", knots_}};
  // Closed forms serialize as their 2^10-knot sampling.
  std::vector<double> k(1025);
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = value_(static_cast<double>(i) / 1024.0);
  return {{"kind", "pwl"}, {"knots", k}};
}

double BoundaryProfile::operator()(double t) const { return value_(t); }

double BoundaryProfile::left_derivative(double t) const { return derivative_(t); }

BoundaryProfile BoundaryProfile::scaled(double factor) const {
  if (is_quadratic_) return quadratic(quadratic_scale_ * factor);
  if (!knots_.empty()) {
    auto k = knots_;
    for (double& v : k) v *= factor;
    return piecewise_linear(std::move(k));
  }
  auto f = value_;
  auto d = derivative_;
  return closed_form([f, factor](double t) { return factor * f(t); },
                     [d, factor](double t) { return factor * d(t); }, label_);
}

ProfileCheck BoundaryProfile::validate(double tol) const {
  ProfileCheck c;
  std::vector<double> v;
  if (!knots_.empty()) {
    v = knots_;
  } else {
    const std::size_t m = std::size_t{1} << 14;
    v.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) v[i] = value_(static_cast<double>(i) / static_cast<double>(m));
  }
  double scale = 1.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  const double m = static_cast<double>(v.size() - 1);
  if (std::abs(v.front()) > tol * scale || std::abs(v.back()) > tol * scale) {
    c.endpoints_zero = false;
    c.message += "endpoint values are not zero; ";
  }
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] < 0.5 * (v[i - 1] + v[i + 1]) - tol * scale) {
      c.concave = false;
      c.message += "midpoint concavity fails near t=" + std::to_string(static_cast<double>(i) / m) + "; ";
      break;
    }
  }
  for (std::size_t i = 1; i < v.size(); ++i) c.lipschitz = std::max(c.lipschitz, std::abs(v[i] - v[i - 1]) * m);
  if (!std::isfinite(c.lipschitz)) c.message += "Lipschitz bound is not finite; ";
  c.ok = c.endpoints_zero && c.concave && std::isfinite(c.lipschitz);
  return c;
}

SpectrumVec discretize(const BoundaryProfile& profile, int n) {
  if (n < 1) throw DomainError("discretize: n must be >= 1");
  const ProfileCheck check = profile.validate();
  if (!check.concave) throw DomainError("discretize: profile is not concave: " + check.message);
  SpectrumVec out(n);
  const double n2 = static_cast<double>(n) * n;
  // Knot-aligned evaluation avoids interpolation rounding for pwl profiles.
  for (int i = 1; i <= n; ++i) out[i - 1] = n2 * (profile(static_cast<double>(i) / n) - profile(static_cast<double>(i - 1) / n));
  return out;
}

SpectrumVec tau(int n) {
  if (n < 1) throw DomainError("tau: n must be >= 1");
  SpectrumVec t(n);
  for (int i = 0; i < n; ++i) t[i] = 0.5 * (n - 1) - i;
  return t;
}

SeminormMode parse_seminorm_mode(const std::string& s) {
  if (s == "sorted" || s == "SortedPrefix") return SeminormMode::SortedPrefix;
  if (s == "antiderivative" || s == "AntiderivativeSup") return SeminormMode::AntiderivativeSup;
  throw DomainError("unknown seminorm mode '" + s + "' (use sorted|antiderivative)");
}

std::string to_string(SeminormMode m) {
  return m == SeminormMode::SortedPrefix ? "SortedPrefix" : "AntiderivativeSup";
}

double seminorm_I(std::span<const double> v, SeminormMode mode) {
  if (v.empty()) return 0.0;
  std::vector<double> c(v.begin(), v.end());
  center_in_place(c);
  if (mode == SeminormMode::SortedPrefix) std::sort(c.begin(), c.end(), std::greater<>());
  double prefix = 0.0, best = 0.0;
  for (double x : c) {
    prefix += x;
    best = std::max(best, mode == SeminormMode::SortedPrefix ? prefix : std::abs(prefix));
  }
  return best;
}

std::vector<double> PrefixConstraint::coefficients(int n) const {
  std::vector<double> a(n, 0.0);
  for (int j = 0; j < prefix && j < n; ++j) a[j] = sign;
  return a;
}

std::vector<PrefixConstraint> ball_constraints_I(std::span<const double> center, double radius) {
  if (!(radius > 0.0)) throw DomainError("ball_constraints_I: radius must be > 0");
  std::vector<PrefixConstraint> out;
  double prefix = 0.0;
  for (std::size_t i = 1; i < center.size(); ++i) {
    prefix += center[i - 1];
    out.push_back({static_cast<int>(i), 1.0, prefix + radius});
    out.push_back({static_cast<int>(i), -1.0, -(prefix - radius)});
  }
  return out;
}

}  // namespace hivelab
