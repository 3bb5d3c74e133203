#include "hivelab/surface_tension.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"

namespace hivelab {

namespace {

void check_slopes(const Slopes& s) {
  for (double v : s)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("slopes must be finite and > 0");
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

FnEstimate f_n(const Slopes& s, int n, const VolumeOptions& options) {
  check_slopes(s);
  if (n < 2 || n > 5) throw DomainError("f_n: n must be in 2..5");
  const VolumeEstimate v = estimate_volume(build_torus_polytope(n, s, TorusVariant::Pinned), options);
  const double d = static_cast<double>(n) * n - 1.0;
  FnEstimate out;
  out.n = n;
  out.log_volume = v.log_volume;
  out.log_std_error = v.std_error;
  out.value = std::exp(v.log_volume / d);
  out.std_error = out.value * v.std_error / d;
  out.method = v.method;
  out.samples = v.samples;
  return out;
}

SigmaEstimate sigma_estimate(const Slopes& s, const std::vector<int>& n_list, const VolumeOptions& options) {
  if (n_list.empty()) throw DomainError("sigma_estimate: empty n list");
  SigmaEstimate out;
  double wsum = 0.0, fsum = 0.0;
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    VolumeOptions o = options;
    o.seed = options.seed + 7919ULL * k;
    out.per_n.push_back(f_n(s, n_list[k], o));
    const auto& e = out.per_n.back();
    const double se = std::max(e.std_error, 1e-12 * e.value);
    const double w = 1.0 / (se * se);
    wsum += w;
    fsum += w * e.value;
  }
  const double f = fsum / wsum;
  double spread2 = 0.0;
  if (out.per_n.size() > 1) {
    for (const auto& e : out.per_n) spread2 += (e.value - f) * (e.value - f);
    spread2 /= static_cast<double>(out.per_n.size() - 1);
  }
  const double se_f = std::sqrt(1.0 / wsum + spread2);
  out.f = f;
  out.sigma = -std::log(f);
  out.std_error = se_f / f;
  return out;
}

double conjectured_sigma_limit(double s0, double s1) {
  if (!(s0 > 0.0 && s1 > 0.0)) throw DomainError("conjectured_sigma_limit: s0, s1 must be > 0");
  const double sum = s0 + s1;
  return -std::log(std::exp(1.0) * sum / M_PI * std::sin(M_PI * s0 / sum));
}

ConjectureReport conjecture_gap(double s0, double s1, const std::vector<double>& s2_list,
                                const std::vector<int>& n_list, const VolumeOptions& options) {
  for (std::size_t i = 1; i < s2_list.size(); ++i)
    if (!(s2_list[i] > s2_list[i - 1])) throw DomainError("conjecture_gap: s2 list must be increasing");
  ConjectureReport r;
  const double conj = conjectured_sigma_limit(s0, s1);
  for (double s2 : s2_list) {
    const SigmaEstimate e = sigma_estimate({s0, s1, s2}, n_list, options);
    r.rows.push_back({s2, e.sigma, e.std_error, conj, e.sigma - conj});
  }
  r.gap_monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    if (std::abs(r.rows[i].gap) > std::abs(r.rows[i - 1].gap)) r.gap_monotone = false;
  return r;
}

// ---- table ----

namespace {

std::vector<double> log_grid(const SigmaGridSpec& spec) {
  if (!(spec.lo > 0.0 && spec.hi > spec.lo) || spec.points < 2)
    throw DomainError("sigma grid: need 0 < lo < hi and at least 2 points");
  std::vector<double> g(spec.points);
  const double step = std::log(spec.hi / spec.lo) / (spec.points - 1);
  for (int i = 0; i < spec.points; ++i) g[i] = spec.lo * std::exp(step * i);
  return g;
}

}  // namespace

SigmaTable SigmaTable::build(const SigmaGridSpec& spec, const VolumeOptions& options,
                             const std::function<void(int, int)>& progress) {
  SigmaTable t;
  t.grid_ = log_grid(spec);
  t.n_list_ = spec.n_list;
  t.budget_ = options.budget;
  const int P = spec.points;
  t.sigma_.assign(static_cast<std::size_t>(P) * P * P, kInf);
  t.stderr_.assign(t.sigma_.size(), 0.0);
  std::vector<std::array<int, 3>> base;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k)
        if (std::min({i, j, k}) == 0) base.push_back({i, j, k});
  std::mutex mu;
  int done = 0;
  const int total = static_cast<int>(base.size());
  parallel_for_chunks(total, options.threads, [&](int idx) {
    const auto [i, j, k] = base[idx];
    VolumeOptions o = options;
    o.threads = 1;
    o.seed = options.seed + 104729ULL * static_cast<std::uint64_t>(idx + 1);
    const SigmaEstimate e = sigma_estimate({t.grid_[i], t.grid_[j], t.grid_[k]}, spec.n_list, o);
    std::lock_guard<std::mutex> lock(mu);
    t.sigma_[t.flat(i, j, k)] = e.sigma;
    t.stderr_[t.flat(i, j, k)] = e.std_error;
    ++done;
    if (progress) progress(done, total);
  });
  t.fill_by_homogeneity();
  t.build_envelope();
  return t;
}

SigmaTable SigmaTable::from_function(const SigmaGridSpec& spec, const std::function<double(const Slopes&)>& sigma,
                                     double std_error) {
  SigmaTable t;
  t.grid_ = log_grid(spec);
  t.n_list_ = spec.n_list;
  const int P = spec.points;
  t.sigma_.resize(static_cast<std::size_t>(P) * P * P);
  t.stderr_.assign(t.sigma_.size(), std_error);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) t.sigma_[t.flat(i, j, k)] = sigma({t.grid_[i], t.grid_[j], t.grid_[k]});
  t.build_envelope();
  return t;
}

void SigmaTable::fill_by_homogeneity() {
  const int P = points();
  const double log_ratio = std::log(grid_[1] / grid_[0]);
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) {
        const int m = std::min({i, j, k});
        if (m == 0) continue;
        sigma_[flat(i, j, k)] = sigma_[flat(i - m, j - m, k - m)] - m * log_ratio;
        stderr_[flat(i, j, k)] = stderr_[flat(i - m, j - m, k - m)];
      }
}

void SigmaTable::build_envelope() {
  planes_.clear();
  const int P = points();
  std::vector<Eigen::Vector3d> dirs;
  std::vector<double> fv;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) {
        if (std::min({i, j, k}) != 0) continue;
        const double sg = sigma_[flat(i, j, k)];
        if (!std::isfinite(sg)) continue;
        dirs.emplace_back(grid_[i], grid_[j], grid_[k]);
        fv.push_back(std::exp(-sg));
      }
  const std::size_t N = dirs.size();
  double fmax = 0.0;
  for (double f : fv) fmax = std::max(fmax, f);
  const double tol = 1e-10 * std::max(1.0, fmax);
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = a + 1; b < N; ++b)
      for (std::size_t c = b + 1; c < N; ++c) {
        Eigen::Matrix3d S;
        S.row(0) = dirs[a];
        S.row(1) = dirs[b];
        S.row(2) = dirs[c];
        // Skip nearly coplanar direction triples.
        if (std::abs(S.determinant()) < 1e-9 * dirs[a].norm() * dirs[b].norm() * dirs[c].norm()) continue;
        const Eigen::Vector3d w = S.partialPivLu().solve(Eigen::Vector3d(fv[a], fv[b], fv[c]));
        bool above = true;
        for (std::size_t q = 0; q < N && above; ++q) above = w.dot(dirs[q]) >= fv[q] - tol * dirs[q].sum();
        if (!above) continue;
        bool dup = false;
        for (const auto& p : planes_)
          if ((p - w).norm() <= 1e-12 * std::max(1.0, w.norm())) {
            dup = true;
            break;
          }
        if (!dup) planes_.push_back(w);
      }
}

double SigmaTable::envelope_f(const Slopes& s, int* facet) const {
  if (planes_.empty()) throw NumericError("sigma table: no envelope planes");
  const Eigen::Vector3d v(s[0], s[1], s[2]);
  double best = kInf;
  int arg = -1;
  for (std::size_t k = 0; k < planes_.size(); ++k) {
    const double val = planes_[k].dot(v);
    if (val < best) {
      best = val;
      arg = static_cast<int>(k);
    }
  }
  if (facet) *facet = arg;
  return best;
}

double SigmaTable::interpolate(const Slopes& s, SigmaInterpolation mode) const {
  check_slopes(s);
  if (mode == SigmaInterpolation::ConcaveEnvelope) {
    const double f = envelope_f(s);
    return f > 0.0 ? -std::log(f) : kInf;
  }
  const int P = points();
  const double log_ratio = std::log(grid_[1] / grid_[0]);
  std::array<double, 3> u;
  for (int d = 0; d < 3; ++d) u[d] = std::log(s[d] / grid_[0]) / log_ratio;
  const double umin = *std::min_element(u.begin(), u.end());
  const double umax = *std::max_element(u.begin(), u.end());
  const double lo = umax - (P - 1), hi = umin;
  if (lo > hi + 1e-9) throw DomainError("sigma table: slopes beyond the homogeneity reach of the grid");
  const double shift = std::clamp(0.0, lo, std::max(lo, hi));
  std::array<int, 3> base;
  std::array<double, 3> frac;
  for (int d = 0; d < 3; ++d) {
    const double v = std::clamp(u[d] - shift, 0.0, static_cast<double>(P - 1));
    base[d] = std::min(static_cast<int>(std::floor(v)), P - 2);
    frac[d] = v - base[d];
  }
  double out = 0.0;
  for (int c = 0; c < 8; ++c) {
    double w = 1.0;
    std::array<int, 3> idx;
    for (int d = 0; d < 3; ++d) {
      const int bit = (c >> d) & 1;
      idx[d] = base[d] + bit;
      w *= bit ? frac[d] : 1.0 - frac[d];
    }
    if (w == 0.0) continue;
    out += w * sigma_[flat(idx[0], idx[1], idx[2])];
  }
  return out - shift * log_ratio;
}

Eigen::Vector3d SigmaTable::envelope_gradient(const Slopes& s) const {
  check_slopes(s);
  int facet = -1;
  const double f = envelope_f(s, &facet);
  if (!(f > 0.0)) return Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  return -planes_[facet] / f;
}

SigmaTable::ConvexityCertificate SigmaTable::certify_convexity() const {
  ConvexityCertificate c;
  const int P = points();
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) {
        if (std::min({i, j, k}) != 0) continue;
        const double sg = sigma_[flat(i, j, k)];
        if (!std::isfinite(sg)) continue;
        ++c.nodes;
        const double f = std::exp(-sg);
        const double env = envelope_f({grid_[i], grid_[j], grid_[k]});
        const double gap = env - f;
        const double se = f * stderr_[flat(i, j, k)];
        c.worst_gap = std::max(c.worst_gap, gap / f);
        if (gap > 3.0 * se + 1e-9 * f) ++c.violations;
      }
  return c;
}

int SigmaTable::monotonicity_violations() const {
  const int P = points();
  int bad = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) {
        const std::array<int, 3> idx{i, j, k};
        for (int d = 0; d < 3; ++d) {
          if (idx[d] + 1 >= P) continue;
          auto nxt = idx;
          ++nxt[d];
          const std::size_t a = flat(i, j, k), b = flat(nxt[0], nxt[1], nxt[2]);
          const double se = std::hypot(stderr_[a], stderr_[b]);
          if (sigma_[b] > sigma_[a] + 3.0 * se + 1e-12) ++bad;
        }
      }
  return bad;
}

double SigmaTable::max_stderr() const {
  double m = 0.0;
  for (double v : stderr_) m = std::max(m, v);
  return m;
}

std::string SigmaTable::version() const {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  auto mix = [&h](double v) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ULL;
    }
  };
  for (double v : grid_) mix(v);
  for (double v : sigma_) mix(v);
  for (double v : stderr_) mix(v);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  std::ostringstream os;
  os << "P" << points() << "-n";
  for (std::size_t i = 0; i < n_list_.size(); ++i) os << (i ? "," : "") << n_list_[i];
  os << "-" << std::string(buf).substr(0, 10);
  return os.str();
}

nlohmann::json SigmaTable::to_json() const {
  const int P = points();
  nlohmann::json sig = nlohmann::json::array(), se = nlohmann::json::array();
  for (int i = 0; i < P; ++i) {
    nlohmann::json si = nlohmann::json::array(), ei = nlohmann::json::array();
    for (int j = 0; j < P; ++j) {
      std::vector<double> sk(P), ek(P);
      for (int k = 0; k < P; ++k) {
        sk[k] = sigma_[flat(i, j, k)];
        ek[k] = stderr_[flat(i, j, k)];
      }
      si.push_back(sk);
      ei.push_back(ek);
    }
    sig.push_back(si);
    se.push_back(ei);
  }
  return {{"schema_version", 1}, {"grid", grid_}, {"sigma", sig}, {"stderr", se},
          {"n_list", n_list_},   {"budget", budget_}, {"version", version()}};
}

SigmaTable SigmaTable::from_json(const nlohmann::json& j) {
  SigmaTable t;
  t.grid_ = j.at("grid").get<std::vector<double>>();
  t.n_list_ = j.value("n_list", std::vector<int>{});
  t.budget_ = j.value("budget", 0L);
  const int P = t.points();
  if (P < 2) throw DomainError("sigma table: grid needs at least 2 points");
  t.sigma_.resize(static_cast<std::size_t>(P) * P * P);
  t.stderr_.resize(t.sigma_.size());
  const auto& sig = j.at("sigma");
  const auto& se = j.at("stderr");
  if (sig.size() != static_cast<std::size_t>(P) || se.size() != static_cast<std::size_t>(P))
    throw DomainError("sigma table: array shape does not match the grid");
  for (int i = 0; i < P; ++i)
    for (int jj = 0; jj < P; ++jj)
      for (int k = 0; k < P; ++k) {
        t.sigma_[t.flat(i, jj, k)] = sig.at(i).at(jj).at(k).get<double>();
        t.stderr_[t.flat(i, jj, k)] = se.at(i).at(jj).at(k).get<double>();
      }
  t.build_envelope();
  return t;
}

SigmaTable SigmaTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open sigma table '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("sigma table '" + path + "': " + e.what());
  }
  return from_json(j);
}

void SigmaTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DomainError("cannot write sigma table '" + path + "'");
  out << to_json().dump(1) << '\n';
}

}  // namespace hivelab
