#include <algorithm>
#include <cmath>
#include <limits>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"
#include "hivelab/polytope.hpp"

namespace hivelab {

std::string to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::Auto: return "Auto";
    case VolumeMethod::Rejection: return "Rejection";
    case VolumeMethod::Annealed: return "Annealed";
  }
  return "?";
}

VolumeMethod parse_volume_method(const std::string& s) {
  if (s == "auto" || s == "Auto") return VolumeMethod::Auto;
  if (s == "rejection" || s == "Rejection") return VolumeMethod::Rejection;
  if (s == "annealed" || s == "Annealed") return VolumeMethod::Annealed;
  throw DomainError("unknown volume method '" + s + "'");
}

double VolumeEstimate::volume() const { return std::exp(log_volume); }
double VolumeEstimate::volume_stderr() const { return volume() * std_error; }

namespace {

constexpr int kRejectionChunks = 64;

double log_ball_volume(int d, double r) {
  return 0.5 * d * std::log(M_PI) - std::lgamma(0.5 * d + 1.0) + d * std::log(r);
}

VolumeEstimate rejection(const ReducedBody& body, const VolumeOptions& opt) {
  const int d = body.dim();
  const auto [lo, hi] = bounding_box(body);
  VolumeEstimate est;
  est.method = VolumeMethod::Rejection;
  est.dimension = d;
  double log_box = 0.0;
  for (int j = 0; j < d; ++j) {
    const double w = hi(j) - lo(j);
    if (!(w > 0.0)) {
      est.lower_dimensional = true;
      est.log_volume = -std::numeric_limits<double>::infinity();
      return est;
    }
    log_box += std::log(w);
  }
  const long total = std::max<long>(opt.budget, kRejectionChunks);
  std::vector<long> hits(kRejectionChunks, 0), drawn(kRejectionChunks, 0);
  parallel_for_chunks(kRejectionChunks, opt.threads, [&](int chunk) {
    auto rng = make_rng(opt.seed, static_cast<std::uint64_t>(chunk));
    std::uniform_real_distribution<double> unif;
    const long count = total / kRejectionChunks + (chunk < total % kRejectionChunks ? 1 : 0);
    Eigen::VectorXd y(d);
    long h = 0;
    for (long s = 0; s < count; ++s) {
      for (int j = 0; j < d; ++j) y(j) = lo(j) + (hi(j) - lo(j)) * unif(rng);
      bool inside = true;
      for (Eigen::Index i = 0; i < body.A.rows() && inside; ++i) inside = body.A.row(i).dot(y) <= body.b(i);
      h += inside ? 1 : 0;
    }
    hits[chunk] = h;
    drawn[chunk] = count;
  });
  long H = 0, N = 0;
  for (int c = 0; c < kRejectionChunks; ++c) {
    H += hits[c];
    N += drawn[c];
  }
  est.samples = N;
  if (H == 0) {
    est.bound_only = true;
    est.log_volume = log_box - std::log(static_cast<double>(N));
    est.std_error = std::numeric_limits<double>::infinity();
    return est;
  }
  const double p = static_cast<double>(H) / static_cast<double>(N);
  est.log_volume = log_box + std::log(p);
  est.std_error = std::sqrt((1.0 - p) / (static_cast<double>(N) * p));
  return est;
}

// Affine change y = shift + T z with T lower triangular.
struct Frame {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  double log_det = 0.0;
};

// Round the body with the sample covariance of a short hit-and-run run.
Frame round_body(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& start, long steps,
                 std::uint64_t seed) {
  const Eigen::Index d = A.cols();
  HitAndRunChain chain(A, b, start, seed, DirectionMode::Isotropic);
  for (long k = 0; k < steps / 5; ++k) chain.step();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
  long count = 0;
  for (long k = 0; k < steps; ++k) {
    chain.step();
    mean += chain.state();
    second += chain.state() * chain.state().transpose();
    ++count;
  }
  mean /= static_cast<double>(count);
  Eigen::MatrixXd cov = second / static_cast<double>(count) - mean * mean.transpose();
  const double ridge = 1e-10 * std::max(1e-300, cov.diagonal().maxCoeff());
  cov += ridge * Eigen::MatrixXd::Identity(d, d);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  Frame f;
  if (llt.info() != Eigen::Success) {
    f.A = A;
    f.b = b;
    return f;
  }
  const Eigen::MatrixXd T = llt.matrixL();
  // y = mean + T z  =>  A T z <= b - A mean
  f.A = A * T;
  f.b = b - A * mean;
  for (Eigen::Index j = 0; j < d; ++j) f.log_det += std::log(T(j, j));
  if ((f.b.array() <= 0.0).any()) {  // mean drifted outside by roundoff; keep the old frame
    f.A = A;
    f.b = b;
    f.log_det = 0.0;
  }
  return f;
}

VolumeEstimate annealed(const ReducedBody& body, const VolumeOptions& opt) {
  const int d = body.dim();
  VolumeEstimate est;
  est.method = VolumeMethod::Annealed;
  est.dimension = d;
  const long budget = std::max<long>(opt.budget, 1000L * d);
  const long rounding_steps = std::max<long>(200L * d, budget / 20);

  // Two rounding passes.
  Eigen::MatrixXd A = body.A;
  Eigen::VectorXd b = body.b;
  double log_det = 0.0;
  for (int pass = 0; pass < 2; ++pass) {
    ReducedBody tmp;
    tmp.A = A;
    tmp.b = b;
    tmp.origin = Eigen::VectorXd::Zero(d);
    tmp.basis = Eigen::MatrixXd::Identity(d, d);
    const InteriorPoint ip = interior_point(tmp);
    Frame f = round_body(A, b, ip.y, rounding_steps / 2, opt.seed * 7919 + static_cast<std::uint64_t>(pass));
    A = std::move(f.A);
    b = std::move(f.b);
    log_det += f.log_det;
  }
  ReducedBody rounded;
  rounded.A = A;
  rounded.b = b;
  rounded.origin = Eigen::VectorXd::Zero(d);
  rounded.basis = Eigen::MatrixXd::Identity(d, d);
  const InteriorPoint ip = interior_point(rounded);
  const Eigen::VectorXd center = ip.y;
  const double r0 = ip.radius * (1.0 - 1e-9);
  const auto [lo, hi] = bounding_box(rounded);
  double R2 = 0.0;
  for (int j = 0; j < d; ++j) R2 += std::max(std::pow(hi(j) - center(j), 2), std::pow(lo(j) - center(j), 2));
  const double R = std::sqrt(R2);

  // Radii r_0 < r_1 < ... < r_m = R with ball-volume ratio phase_ratio.
  const double growth = std::pow(1.0 / opt.phase_ratio, 1.0 / d);
  const int phases = std::max(1, static_cast<int>(std::ceil(std::log(R / r0) / std::log(growth))));
  std::vector<double> radii(phases + 1);
  for (int i = 0; i <= phases; ++i) radii[i] = r0 * std::pow(growth, i);
  radii[phases] = R;
  est.phases = phases;

  const int K = std::max(2, opt.chains);
  const long per_phase = std::max<long>(50, (budget - rounding_steps) / (static_cast<long>(K) * phases) * 4 / 5);
  const long burn = per_phase / 4;
  // hits[chain][phase], fraction of samples from K ∩ B(r_i) that fall in B(r_{i-1}).
  std::vector<std::vector<long>> hits(K, std::vector<long>(phases + 1, 0));
  parallel_for_chunks(K, opt.threads, [&](int k) {
    HitAndRunChain chain(A, b, center, opt.seed + 1000003ULL * static_cast<std::uint64_t>(k + 1),
                         DirectionMode::Coordinate);
    for (int i = 1; i <= phases; ++i) {
      chain.set_ball(center, radii[i]);
      for (long s = 0; s < burn; ++s) chain.step();
      const double inner2 = radii[i - 1] * radii[i - 1];
      long h = 0;
      for (long s = 0; s < per_phase; ++s) {
        chain.step();
        if (chain.ball_distance2() <= inner2) ++h;
      }
      hits[k][i] = h;
    }
  });
  est.samples = rounding_steps + static_cast<long>(K) * phases * (per_phase + burn);

  auto log_volume_without = [&](int skip) {
    double lv = log_ball_volume(d, r0) + log_det;
    const double n = static_cast<double>(per_phase) * (skip < 0 ? K : K - 1);
    for (int i = 1; i <= phases; ++i) {
      long h = 0;
      for (int k = 0; k < K; ++k)
        if (k != skip) h += hits[k][i];
      const double p = std::max(0.5, static_cast<double>(h)) / n;
      lv -= std::log(p);
    }
    return lv;
  };
  est.log_volume = log_volume_without(-1);
  // Jackknife over chains.
  std::vector<double> loo(K);
  double mean = 0.0;
  for (int k = 0; k < K; ++k) mean += (loo[k] = log_volume_without(k));
  mean /= K;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  est.std_error = std::sqrt(ss * (K - 1) / K);
  return est;
}

}  // namespace

VolumeEstimate estimate_volume(const ReducedBody& body, const VolumeOptions& options) {
  const InteriorPoint ip = interior_point(body);
  VolumeEstimate est;
  est.dimension = body.dim();
  if (body.dim() == 0) {
    est.method = VolumeMethod::Rejection;
    return est;  // a single point: counting measure 1
  }
  if (!ip.full_dimensional) {
    est.lower_dimensional = true;
    est.log_volume = -std::numeric_limits<double>::infinity();
    return est;
  }
  VolumeMethod m = options.method;
  if (m == VolumeMethod::Auto) m = body.dim() <= 8 ? VolumeMethod::Rejection : VolumeMethod::Annealed;
  return m == VolumeMethod::Rejection ? rejection(body, options) : annealed(body, options);
}

VolumeEstimate estimate_volume(const LinearInequalitySystem& sys, const VolumeOptions& options) {
  return estimate_volume(reduce(sys), options);
}

}  // namespace hivelab
