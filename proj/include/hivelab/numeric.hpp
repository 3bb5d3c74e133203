#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace hivelab {

// Independent stream for (seed, stream index); same inputs give the same engine.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

// Supported point counts: 7, 10, 15, 20, 25, 30.
const GaussRule& gauss_legendre(int points);

// Integrate f over [a, b], splitting at the given interior breakpoints.
double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breaks, int points);

// Run body(chunk) for chunk in [0, chunks) on up to `threads` workers.
void parallel_for_chunks(int chunks, int threads, const std::function<void(int)>& body);

}  // namespace hivelab
