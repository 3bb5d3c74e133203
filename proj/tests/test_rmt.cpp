#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "hivelab/errors.hpp"
#include "hivelab/numeric.hpp"
#include "hivelab/polytope.hpp"
#include "hivelab/rmt.hpp"
#include "oracles.hpp"

using namespace hivelab;

namespace {

McOptions mc(long trials, std::uint64_t seed = 1) {
  McOptions o;
  o.trials = trials;
  o.seed = seed;
  return o;
}

VolumeOptions vol(long budget, std::uint64_t seed = 1) {
  VolumeOptions o;
  o.budget = budget;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("Haar unitary is unitary and conjugation keeps the spectrum") {
  auto rng = make_rng(3);
  for (int n : {1, 2, 3, 5, 8}) {
    const Eigen::MatrixXcd u = haar_unitary(n, rng);
    CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(n, n)).norm() < 1e-12);
    SpectrumVec l(n);
    for (int i = 0; i < n; ++i) l[i] = 3.0 - 1.3 * i;
    const Eigen::MatrixXcd h = haar_conjugate(l, rng);
    CHECK((h - h.adjoint()).norm() < 1e-12);
    const SpectrumVec back = hermitian_eigenvalues(h);
    for (int i = 0; i < n; ++i) CHECK(std::abs(back[i] - l[i]) < 1e-9);
  }
  const SpectrumVec zero{0, 0, 0};
  CHECK(haar_conjugate(zero, std::uint64_t{4}).norm() == 0.0);
  CHECK_THROWS_AS(haar_unitary(0, rng), DomainError);
}

TEST_CASE("|U11|^2 is uniform on [0,1] for n = 2") {
  auto rng = make_rng(21);
  const int N = 20000;
  std::vector<double> xs;
  for (int t = 0; t < N; ++t) xs.push_back(std::norm(haar_unitary(2, rng)(0, 0)));
  const double d = oracle::ks_statistic(xs, [](double x) { return std::clamp(x, 0.0, 1.0); });
  CHECK(d < oracle::ks_critical_1pct(N));
}

TEST_CASE("Haar phases: the diagonal of U is not biased toward the positive reals") {
  auto rng = make_rng(22);
  std::complex<double> mean = 0.0;
  const int N = 20000;
  for (int t = 0; t < N; ++t) mean += haar_unitary(3, rng)(1, 1);
  CHECK(std::abs(mean) / N < 5.0 / std::sqrt(N));
}

TEST_CASE("embedding eigenvalues match the characteristic polynomial") {
  auto rng = make_rng(8);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXcd h2(2, 2);
    const double a = g(rng), b = g(rng), re = g(rng), im = g(rng);
    h2 << a, std::complex<double>(re, im), std::complex<double>(re, -im), b;
    const auto e2 = hermitian_eigenvalues(h2);
    const double disc = std::sqrt((a - b) * (a - b) / 4.0 + re * re + im * im);
    CHECK(std::abs(e2[0] - ((a + b) / 2 + disc)) < 1e-9);
    CHECK(std::abs(e2[1] - ((a + b) / 2 - disc)) < 1e-9);

    Eigen::MatrixXcd h3(3, 3);
    const double d1 = g(rng), d2 = g(rng), d3 = g(rng);
    const std::complex<double> z12(g(rng), g(rng)), z13(g(rng), g(rng)), z23(g(rng), g(rng));
    h3 << d1, z12, z13, std::conj(z12), d2, z23, std::conj(z13), std::conj(z23), d3;
    const auto e3 = hermitian_eigenvalues(h3);
    const auto want = oracle::hermitian3_eigenvalues(d1, d2, d3, z12.real(), z12.imag(), z13.real(), z13.imag(),
                                                     z23.real(), z23.imag());
    for (int i = 0; i < 3; ++i) CHECK(std::abs(e3[i] - want[i]) < 1e-9);
  }
  CHECK_THROWS_AS(hermitian_eigenvalues(Eigen::MatrixXcd(2, 3)), DomainError);
}

TEST_CASE("spectrum of sums: trivial cases") {
  const SpectrumVec l{2, 0.5, -2.5}, z{0, 0, 0};
  const auto s = spectrum_of_sum(l, z, std::uint64_t{5});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(s[i] - l[i]) < 1e-9);
  const SpectrumVec a{1.5}, b{-0.25};
  CHECK(spectrum_of_sum(a, b, std::uint64_t{1})[0] == doctest::Approx(1.25));
  CHECK_THROWS_AS(spectrum_of_sum(l, a, std::uint64_t{1}), DomainError);
}

TEST_CASE("n = 2 top eigenvalue has CDF c^2/4 on [0, 2]") {
  const SpectrumVec l{1, -1};
  const auto xs = top_eigenvalue_samples(l, l, mc(200000, 31));
  CHECK(xs.size() == 200000);
  const double d = oracle::ks_statistic(xs, [](double c) { return std::clamp(c * c / 4.0, 0.0, 1.0); });
  CHECK(d < 0.01);
  CHECK(d < oracle::ks_critical_1pct(xs.size()));
}

TEST_CASE("conjugating both summands by a fixed unitary leaves the top eigenvalue law unchanged") {
  auto wrng = make_rng(99);
  for (int n : {2, 3, 4}) {
    const Eigen::MatrixXcd w = haar_unitary(n, wrng);
    SpectrumVec l(n), m(n);
    for (int i = 0; i < n; ++i) {
      l[i] = n - 1.0 - 2.0 * i;
      m[i] = (i == 0 ? 2.0 : -2.0 / (n - 1));
    }
    const int N = 6000;
    std::vector<double> plain, rotated;
    auto r1 = make_rng(1000 + n), r2 = make_rng(2000 + n);
    for (int t = 0; t < N; ++t) {
      plain.push_back(spectrum_of_sum(l, m, r1)[0]);
      const Eigen::MatrixXcd x = haar_conjugate(l, r2), y = haar_conjugate(m, r2);
      rotated.push_back(hermitian_eigenvalues(w * (x + y) * w.adjoint())[0]);
    }
    CHECK(oracle::ks_two_sample(plain, rotated) < oracle::ks_two_sample_critical_1pct(N, N));
  }
}

TEST_CASE("sampled spectra always admit a hive") {
  for (int n : {2, 3, 4}) {
    SpectrumVec l(n), m(n);
    for (int i = 0; i < n; ++i) {
      l[i] = (n - 1.0) / 2.0 - i;
      m[i] = 0.7 * ((n - 1.0) / 2.0 - i) * ((n - 1.0) / 2.0 - i) * (i % 2 ? -1.0 : 1.0);
    }
    std::sort(m.begin(), m.end(), std::greater<>());
    std::vector<double> mc_m(m);
    center_in_place(mc_m);
    auto rng = make_rng(400 + n);
    const int trials = n == 4 ? 3000 : 10000;
    int failures = 0;
    for (int t = 0; t < trials; ++t) {
      const SpectrumVec nu = spectrum_of_sum(l, mc_m, rng);
      try {
        interior_point(build_hive_polytope(l, mc_m, nu));
      } catch (const InfeasibleError&) {
        ++failures;
      }
    }
    CHECK(failures == 0);
  }
}

TEST_CASE("horn_probability trivial limits and the n = 2 closed form") {
  const SpectrumVec l{1, -1};
  const auto all = horn_probability(l, l, l, 100.0, SeminormMode::AntiderivativeSup, mc(2000));
  CHECK(all.p == 1.0);
  const auto none = horn_probability(l, l, l, 0.0, SeminormMode::AntiderivativeSup, mc(2000));
  CHECK(none.p == 0.0);
  const auto p = horn_probability(l, l, l, 0.25, SeminormMode::AntiderivativeSup, mc(100000, 5));
  CHECK(std::abs(p.p - 0.25) < 3.0 * p.std_error);
  CHECK(p.trials == 100000);
  CHECK(p.hits == static_cast<long>(std::llround(p.p * p.trials)));
  // Non-centered input is shifted, and the shift is reported.
  const SpectrumVec l2{3, 1}, m2{2, 0}, n2{4, 2};
  const auto q = horn_probability(l2, m2, n2, 0.25, SeminormMode::AntiderivativeSup, mc(20000, 5));
  CHECK(q.shift == doctest::Approx(3.0));
  CHECK(std::abs(q.p - 0.25) < 4.0 * q.std_error);
  CHECK_THROWS_AS(horn_probability(l, l, SpectrumVec{1, 0, -1}, 0.1, SeminormMode::AntiderivativeSup, mc(10)),
                  DomainError);
}

TEST_CASE("horn_probability is reproducible for a fixed seed and thread count") {
  const SpectrumVec l{2, 0, -2};
  const auto a = horn_probability(l, l, l, 0.5, SeminormMode::SortedPrefix, mc(5000, 77));
  const auto b = horn_probability(l, l, l, 0.5, SeminormMode::SortedPrefix, mc(5000, 77));
  CHECK(a.hits == b.hits);
  McOptions threaded = mc(5000, 77);
  threaded.threads = 4;
  CHECK(horn_probability(l, l, l, 0.5, SeminormMode::SortedPrefix, threaded).hits == a.hits);
}

TEST_CASE("n = 2 predictions") {
  const SpectrumVec l{1, -1};
  const auto q = predicted_probability_n2(l, l, l, 0.25);
  CHECK(q.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(q.method == "quadrature");
  CHECK(predicted_probability_n2(l, l, l, 5.0).value == doctest::Approx(1.0).epsilon(1e-12));
  // λ = (a, -a), μ = (b, -b): density c / (2ab) on [|a - b|, a + b].
  const SpectrumVec a{2, -2}, b{0.5, -0.5}, c{2, -2};
  CHECK(predicted_probability_n2(a, b, c, 0.3).value == doctest::Approx((2.3 * 2.3 - 1.7 * 1.7) / (4.0 * 2.0 * 0.5)));
  const auto p = predicted_probability(l, l, l, 0.25, SeminormMode::AntiderivativeSup, vol(400000));
  CHECK(p.method == "polytope");
  CHECK(std::abs(p.value - 0.25) < 3.0 * p.std_error + 1e-9);
  const auto whole = predicted_probability(l, l, l, 10.0, SeminormMode::AntiderivativeSup, vol(400000));
  CHECK(std::abs(whole.value - 1.0) < 3.0 * whole.std_error + 1e-9);
  const auto zero = predicted_probability(l, l, l, 0.0, SeminormMode::AntiderivativeSup, vol(1000));
  CHECK(zero.value == 0.0);
  const auto far = predicted_probability(l, l, SpectrumVec{5, -5}, 0.5, SeminormMode::AntiderivativeSup, vol(1000));
  CHECK(far.value == 0.0);
  CHECK(far.infeasible);
  CHECK_THROWS_AS(predicted_probability(SpectrumVec{1, 0, 0, 0, -1}, SpectrumVec{1, 0, 0, 0, -1},
                                        SpectrumVec{1, 0, 0, 0, -1}, 0.1, SeminormMode::AntiderivativeSup, vol(10)),
                  DomainError);
}

TEST_CASE("n = 3 prediction matches Monte Carlo") {
  const SpectrumVec l{2, 0, -2};
  for (auto mode : {SeminormMode::AntiderivativeSup, SeminormMode::SortedPrefix}) {
    const auto mcp = horn_probability(l, l, l, 0.5, mode, mc(100000, 13));
    const auto pred = predicted_probability(l, l, l, 0.5, mode, vol(2000000, 14));
    const double se = std::hypot(mcp.std_error, pred.std_error);
    CHECK(std::abs(mcp.p - pred.value) < 3.0 * se);
    CHECK(pred.std_error < 0.1 * pred.value);
  }
}

TEST_CASE("histogram CSV") {
  const std::string csv = histogram_csv({0.1, 0.2, 0.6, 1.5, -1.0, 1.0}, 2, 0.0, 1.0);
  CHECK(csv == "value,count\n0.25,2\n0.75,2\n");
  CHECK_THROWS_AS(histogram_csv({}, 0, 0.0, 1.0), DomainError);
}
