#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hivelab/polytope.hpp"
#include "hivelab/spectra.hpp"

namespace hivelab {

// Haar unitary: Q of a complex Ginibre matrix with the phases of diag(R) divided out.
Eigen::MatrixXcd haar_unitary(int n, std::mt19937_64& rng);

// U diag(λ) U* with U Haar.
Eigen::MatrixXcd haar_conjugate(std::span<const double> lambda, std::mt19937_64& rng);
Eigen::MatrixXcd haar_conjugate(std::span<const double> lambda, std::uint64_t seed);

// Eigenvalues (decreasing) through the real symmetric embedding [[Re, -Im], [Im, Re]];
// every eigenvalue appears twice there. Throws NumericError if the copies do not pair up.
SpectrumVec hermitian_eigenvalues(const Eigen::MatrixXcd& h);

// spec(U diag(λ) U* + V diag(μ) V*), decreasing.
SpectrumVec spectrum_of_sum(std::span<const double> lambda, std::span<const double> mu, std::mt19937_64& rng);
SpectrumVec spectrum_of_sum(std::span<const double> lambda, std::span<const double> mu, std::uint64_t seed);

struct McOptions {
  long trials = 100000;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct ProbabilityEstimate {
  double p = 0.0;
  double std_error = 0.0;
  long trials = 0;
  long hits = 0;
  double shift = 0.0;  // mean subtracted from λ + μ (and ν) before sampling
};

// Frequency of ||spec(X + Y) - ν||_I < ε.
ProbabilityEstimate horn_probability(std::span<const double> lambda, std::span<const double> mu,
                                     std::span<const double> nu, double eps, SeminormMode mode,
                                     const McOptions& options);

// Top eigenvalue of X + Y per trial, in trial order.
std::vector<double> top_eigenvalue_samples(std::span<const double> lambda, std::span<const double> mu,
                                           const McOptions& options);

struct Prediction {
  double value = 0.0;
  double std_error = 0.0;
  double log_prefactor = 0.0;   // log(V(τ)^2 / (V(λ) V(μ)))
  double log_volume = 0.0;      // log of the augmented-polytope volume over the ball
  std::string method;           // "polytope" | "quadrature"
  bool infeasible = false;
};

// (V(τ)^2 / (V(λ) V(μ))) · |augmented polytope ∩ {ν' : ||ν' - ν||_I <= ε}|. The
// sorted-prefix ball is not polyhedral in ν'; for that mode the full augmented
// polytope is sampled and the fraction inside the ball is used.
Prediction predicted_probability(std::span<const double> lambda, std::span<const double> mu,
                                 std::span<const double> nu, double eps, SeminormMode mode,
                                 const VolumeOptions& options);

// n = 2 only: ∫ over the Horn interval ∩ ball of V(τ) V(ν') / (V(λ) V(μ)) dν'_1.
Prediction predicted_probability_n2(std::span<const double> lambda, std::span<const double> mu,
                                    std::span<const double> nu, double eps);

// "value,count" lines over `bins` equal bins of [lo, hi]; out-of-range values are dropped.
std::string histogram_csv(const std::vector<double>& values, int bins, double lo, double hi);

}  // namespace hivelab
