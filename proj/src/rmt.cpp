#include "hivelab/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"
#include "hivelab/vandermonde.hpp"

namespace hivelab {

namespace {

constexpr int kMcChunks = 64;

std::vector<double> centered(std::span<const double> v, double* shift = nullptr) {
  std::vector<double> c(v.begin(), v.end());
  const double s = center_in_place(c);
  if (shift) *shift = s;
  return c;
}

}  // namespace

Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng) {
  if (n < 1) throw DomainError("haar_unitary: n must be >= 1");
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  Eigen::MatrixXcd z(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) z(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    const std::complex<double> d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= a > 0.0 ? d / a : std::complex<double>(1.0, 0.0);
  }
  return q;
}

Eigen::MatrixXcd haar_conjugate(std::span<const double> lambda, std::mt19937_64& rng) {
  const int n = static_cast<int>(lambda.size());
  const Eigen::MatrixXcd u = haar_unitary(n, rng);
  Eigen::VectorXcd d(n);
  for (int i = 0; i < n; ++i) d(i) = lambda[i];
  Eigen::MatrixXcd h = u * d.asDiagonal() * u.adjoint();
  // Symmetrize away rounding so the result is exactly Hermitian.
  return 0.5 * (h + h.adjoint());
}

Eigen::MatrixXcd haar_conjugate(std::span<const double> lambda, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return haar_conjugate(lambda, rng);
}

SpectrumVec hermitian_eigenvalues(const Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  if (h.cols() != n) throw DomainError("hermitian_eigenvalues: matrix must be square");
  if (n == 0) return {};
  Eigen::MatrixXd m(2 * n, 2 * n);
  m.topLeftCorner(n, n) = h.real();
  m.topRightCorner(n, n) = -h.imag();
  m.bottomLeftCorner(n, n) = h.imag();
  m.bottomRightCorner(n, n) = h.real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("hermitian_eigenvalues: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending, pairs adjacent
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  SpectrumVec out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = ev(2 * k), b = ev(2 * k + 1);
    if (std::abs(a - b) > 1e-8 * scale) throw NumericError("hermitian_eigenvalues: embedding copies do not pair up");
    out[n - 1 - k] = 0.5 * (a + b);
  }
  return out;
}

SpectrumVec spectrum_of_sum(std::span<const double> lambda, std::span<const double> mu, std::mt19937_64& rng) {
  if (lambda.size() != mu.size() || lambda.empty()) throw DomainError("spectrum_of_sum: lengths differ");
  const Eigen::MatrixXcd x = haar_conjugate(lambda, rng);
  const Eigen::MatrixXcd y = haar_conjugate(mu, rng);
  return hermitian_eigenvalues(x + y);
}

SpectrumVec spectrum_of_sum(std::span<const double> lambda, std::span<const double> mu, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return spectrum_of_sum(lambda, mu, rng);
}

ProbabilityEstimate horn_probability(std::span<const double> lambda, std::span<const double> mu,
                                     std::span<const double> nu, double eps, SeminormMode mode,
                                     const McOptions& options) {
  const std::size_t n = lambda.size();
  if (n == 0 || mu.size() != n || nu.size() != n) throw DomainError("horn_probability: lengths differ");
  if (options.trials < 1) throw DomainError("horn_probability: trials must be >= 1");
  double sl = 0.0, sm = 0.0, sn = 0.0;
  const auto l = centered(lambda, &sl), m = centered(mu, &sm), v = centered(nu, &sn);
  std::vector<long> hits(kMcChunks, 0);
  const long total = options.trials;
  parallel_for_chunks(kMcChunks, options.threads, [&](int chunk) {
    auto rng = make_rng(options.seed, static_cast<std::uint64_t>(chunk));
    const long count = total / kMcChunks + (chunk < total % kMcChunks ? 1 : 0);
    std::vector<double> diff(n);
    long h = 0;
    for (long t = 0; t < count; ++t) {
      const SpectrumVec z = spectrum_of_sum(l, m, rng);
      for (std::size_t i = 0; i < n; ++i) diff[i] = z[i] - v[i];
      if (seminorm_I(diff, mode) < eps) ++h;
    }
    hits[chunk] = h;
  });
  ProbabilityEstimate e;
  e.trials = total;
  e.hits = std::accumulate(hits.begin(), hits.end(), 0L);
  e.p = static_cast<double>(e.hits) / static_cast<double>(total);
  e.std_error = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(total));
  e.shift = sl + sm;
  return e;
}

std::vector<double> top_eigenvalue_samples(std::span<const double> lambda, std::span<const double> mu,
                                           const McOptions& options) {
  const long total = options.trials;
  std::vector<double> out(total);
  std::vector<long> offset(kMcChunks + 1, 0);
  for (int c = 0; c < kMcChunks; ++c) offset[c + 1] = offset[c] + total / kMcChunks + (c < total % kMcChunks ? 1 : 0);
  parallel_for_chunks(kMcChunks, options.threads, [&](int chunk) {
    auto rng = make_rng(options.seed, static_cast<std::uint64_t>(chunk));
    for (long t = offset[chunk]; t < offset[chunk + 1]; ++t) out[t] = spectrum_of_sum(lambda, mu, rng).front();
  });
  return out;
}

namespace {

double log_prefactor(std::span<const double> l, std::span<const double> m) {
  const int n = static_cast<int>(l.size());
  const LogValue vl = log_vandermonde(l), vm = log_vandermonde(m), vt = log_vandermonde(tau(n));
  if (vl.degenerate || vm.degenerate) throw DomainError("predicted_probability: λ and μ must have distinct entries");
  return 2.0 * vt.value - vl.value - vm.value;
}

}  // namespace

Prediction predicted_probability(std::span<const double> lambda, std::span<const double> mu,
                                 std::span<const double> nu, double eps, SeminormMode mode,
                                 const VolumeOptions& options) {
  const std::size_t n = lambda.size();
  if (n == 0 || mu.size() != n || nu.size() != n) throw DomainError("predicted_probability: lengths differ");
  if (n > 4) throw DomainError("predicted_probability: n must be <= 4");
  const auto l = centered(lambda), m = centered(mu), v = centered(nu);
  validate_spectrum(l, "lambda");
  validate_spectrum(m, "mu");
  Prediction p;
  p.method = "polytope";
  p.log_prefactor = log_prefactor(l, m);
  if (!(eps > 0.0)) {
    p.log_volume = -std::numeric_limits<double>::infinity();
    return p;
  }
  if (n == 1) {
    p.value = std::abs(l[0] + m[0] - v[0]) < eps ? 1.0 : 0.0;
    return p;
  }
  if (mode == SeminormMode::AntiderivativeSup) {
    const auto sys = build_augmented_polytope(l, m, AugmentedBall{v, eps});
    try {
      const VolumeEstimate est = estimate_volume(sys, options);
      p.log_volume = est.log_volume;
      p.value = std::exp(p.log_prefactor + est.log_volume);
      p.std_error = p.value * est.std_error;
    } catch (const InfeasibleError&) {
      p.infeasible = true;
      p.log_volume = -std::numeric_limits<double>::infinity();
    }
    return p;
  }
  // Sorted-prefix ball: volume of the whole polytope times the fraction of it inside the ball.
  const auto sys = build_augmented_polytope(l, m);
  const VolumeEstimate est = estimate_volume(sys, options);
  const ReducedBody body = reduce(sys);
  const InteriorPoint ip = interior_point(body);
  std::vector<std::pair<int, int>> diag;  // coordinate of (k, k)
  for (std::size_t k = 1; k < n; ++k) diag.push_back({static_cast<int>(k), *sys.coordinate_of({int(k), int(k)})});
  const int chains = std::max(2, options.chains);
  const long per_chain = std::max<long>(1000, options.budget / chains);
  std::vector<double> frac(chains, 0.0);
  parallel_for_chunks(chains, options.threads, [&](int c) {
    HitAndRunChain chain(body.A, body.b, ip.y, options.seed + 7777ULL * (c + 1), DirectionMode::Isotropic);
    for (long s = 0; s < per_chain / 5; ++s) chain.step();
    std::vector<double> diff(n);
    long inside = 0;
    for (long s = 0; s < per_chain; ++s) {
      chain.step();
      const Eigen::VectorXd x = body.lift(chain.state());
      double prev = 0.0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const double cum = x(diag[k].second);
        diff[k] = (cum - prev) - v[k];
        prev = cum;
      }
      diff[n - 1] = (0.0 - prev) - v[n - 1];
      if (seminorm_I(diff, mode) < eps) ++inside;
    }
    frac[c] = static_cast<double>(inside) / static_cast<double>(per_chain);
  });
  double mean = 0.0;
  for (double f : frac) mean += f / chains;
  double ss = 0.0;
  for (double f : frac) ss += (f - mean) * (f - mean);
  const double se_frac = std::sqrt(ss / (chains - 1) / chains);
  p.log_volume = est.log_volume + std::log(mean);
  p.value = std::exp(p.log_prefactor + est.log_volume) * mean;
  const double rel = std::hypot(est.std_error, mean > 0.0 ? se_frac / mean : 0.0);
  p.std_error = mean > 0.0 ? p.value * rel : std::exp(p.log_prefactor + est.log_volume) * se_frac;
  return p;
}

Prediction predicted_probability_n2(std::span<const double> lambda, std::span<const double> mu,
                                    std::span<const double> nu, double eps) {
  if (lambda.size() != 2 || mu.size() != 2 || nu.size() != 2) throw DomainError("predicted_probability_n2: n must be 2");
  const auto l = centered(lambda), m = centered(mu), v = centered(nu);
  validate_spectrum(l, "lambda");
  validate_spectrum(m, "mu");
  Prediction p;
  p.method = "quadrature";
  p.log_prefactor = log_prefactor(l, m);
  const double a = l[0], b = m[0];
  // ν' = (c, -c): hive fiber is one point for |a - b| <= c <= a + b; V(ν') = 2c, V(τ_2) = 1.
  const double lo = std::max(std::abs(a - b), v[0] - eps), hi = std::min(a + b, v[0] + eps);
  if (!(eps > 0.0) || hi <= lo) {
    p.log_volume = -std::numeric_limits<double>::infinity();
    return p;
  }
  const double integral = integrate_pieces([](double c) { return 2.0 * c; }, lo, hi, {}, 10);
  p.log_volume = std::log(integral);
  p.value = std::exp(p.log_prefactor) * integral;
  return p;
}

std::string histogram_csv(const std::vector<double>& values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw DomainError("histogram_csv: need bins >= 1 and hi > lo");
  std::vector<long> counts(bins, 0);
  const double w = (hi - lo) / bins;
  for (double x : values) {
    if (x < lo || x > hi) continue;
    const int b = std::min(bins - 1, static_cast<int>((x - lo) / w));
    ++counts[b];
  }
  std::ostringstream os;
  os.precision(10);
  os << "value,count\n";
  for (int b = 0; b < bins; ++b) os << lo + (b + 0.5) * w << ',' << counts[b] << '\n';
  return os.str();
}

}  // namespace hivelab
