#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hivelab/errors.hpp"
#include "hivelab/vandermonde.hpp"
#include "oracles.hpp"

using namespace hivelab;

namespace {

std::vector<double> random_decreasing(std::mt19937_64& rng, int n, double spread) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  std::sort(v.rbegin(), v.rend());
  center_in_place(v);
  return v;
}

}  // namespace

TEST_CASE("log_vandermonde examples") {
  CHECK(log_vandermonde(tau(3)).value == doctest::Approx(std::log(2.0)));
  CHECK(log_vandermonde(std::vector<double>{2, 0, -2}).value == doctest::Approx(std::log(16.0)));
  CHECK(log_vandermonde(std::vector<double>{0}).value == 0.0);
  const auto tie = log_vandermonde(std::vector<double>{1, 1, -2});
  CHECK(tie.degenerate);
  CHECK(std::isinf(tie.value));
  CHECK_THROWS_AS(log_vandermonde(std::vector<double>{-1, 1}), DomainError);
}

TEST_CASE("log_vandermonde matches the direct product") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    const auto v = random_decreasing(rng, 2 + t % 7, 3.0);
    CHECK(log_vandermonde(v).value == doctest::Approx(std::log(oracle::direct_vandermonde(v))).epsilon(1e-10));
  }
}

TEST_CASE("log_ratio_to_tau and GT volume") {
  for (int n = 1; n <= 40; ++n) {
    auto v = tau(n);
    CHECK(log_ratio_to_tau(v).value == doctest::Approx(0.0).epsilon(1e-12));
    for (double& x : v) x *= 2.0;
    CHECK(log_ratio_to_tau(v).value == doctest::Approx(n * (n - 1) / 2.0 * std::log(2.0)).epsilon(1e-12));
  }
  CHECK(log_ratio_to_tau(std::vector<double>{2, 0, -2}).value == doctest::Approx(std::log(8.0)));
  CHECK(std::exp(gt_log_volume(std::vector<double>{2, 0, -2}).value) == doctest::Approx(8.0));
  CHECK(gt_log_volume(std::vector<double>{0}).value == 0.0);
  CHECK(gt_log_volume(std::vector<double>{1, 1, -2}).degenerate);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto v = random_decreasing(rng, 3, 2.0);
    CHECK(std::exp(gt_log_volume(v).value) == doctest::Approx(oracle::gt_volume_n3(v[0], v[1], v[2])).epsilon(1e-10));
  }
  // Homogeneity of degree C(n,2).
  for (int n = 2; n <= 6; ++n) {
    auto v = tau(n);
    for (double& x : v) x *= 1.7;
    CHECK(gt_log_volume(v).value == doctest::Approx(n * (n - 1) / 2.0 * std::log(1.7)));
  }
}

TEST_CASE("upper bound on the ratio") {
  std::mt19937_64 rng(9);
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 49;
    const auto v = random_decreasing(rng, n, 10.0);
    violations += log_ratio_to_tau(v).value > log_ratio_upper_bound(v) + 1e-9;
  }
  CHECK(violations == 0);
  for (int n = 2; n <= 50; ++n) CHECK(0.0 <= log_ratio_upper_bound(tau(n)) + 1e-9);
}

TEST_CASE("lower bound on log V(tau)") {
  for (int n = 1; n <= 200; ++n) CHECK(log_vandermonde(tau(n)).value >= log_vandermonde_tau_lower_bound(n));
}

TEST_CASE("continuum logV examples") {
  const auto q = continuum_logV(BoundaryProfile::quadratic());
  CHECK_FALSE(q.divergent);
  CHECK(q.value == doctest::Approx(std::log(2.0)).epsilon(1e-6));
  const auto q3 = continuum_logV([](double t) { return 3.0 * (1.0 - 2.0 * t); });
  CHECK(q3.value == doctest::Approx(std::log(2.0) + std::log(3.0)).epsilon(1e-6));
  const auto flat = continuum_logV([](double) { return 0.0; });
  CHECK(flat.divergent);
  CHECK(std::isinf(flat.value));
  CHECK(flat.value < 0);
}

TEST_CASE("finite-n ratio converges to the continuum value") {
  const double pi = std::acos(-1.0);
  std::vector<BoundaryProfile> profiles{
      BoundaryProfile::quadratic(),
      BoundaryProfile::closed_form([pi](double t) { return std::sin(pi * t); },
                                   [pi](double t) { return pi * std::cos(pi * t); }, "sin"),
      BoundaryProfile::closed_form([](double t) { return t - t * t + 0.3 * (t - t * t * t); },
                                   [](double t) { return 1 - 2 * t + 0.3 * (1 - 3 * t * t); }, "cubic"),
      BoundaryProfile::closed_form([](double t) { return std::log1p(t) - t * std::log(2.0); },
                                   [](double t) { return 1.0 / (1.0 + t) - std::log(2.0); }, "log"),
      BoundaryProfile::closed_form(
          [pi](double t) { return t - t * t + 0.2 * std::sin(2 * pi * t) / (2 * pi); },
          [pi](double t) { return 1 - 2 * t + 0.2 * std::cos(2 * pi * t); }, "wavy")};
  for (const auto& p : profiles) {
    const int n = 256;
    const double finite = 2.0 / (double(n) * n) * log_ratio_to_tau(discretize(p, n)).value;
    const double limit = continuum_logV(p).value;
    INFO(p.label());
    CHECK(std::abs(finite - limit) <= 0.01 * std::abs(limit));
  }
  for (int n = 2; n <= 256; ++n) {
    const double finite = 2.0 / (double(n) * n) * log_ratio_to_tau(discretize(profiles[0], n)).value;
    CHECK(finite == doctest::Approx((n - 1.0) / n * std::log(2.0)).epsilon(1e-12));
  }
}
