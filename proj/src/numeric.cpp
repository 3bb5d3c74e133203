#include "hivelab/numeric.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <exception>
#include <mutex>
#include <thread>

#include "hivelab/errors.hpp"

namespace hivelab {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

namespace {

template <unsigned N>
GaussRule expand_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  GaussRule rule;
  // boost stores the nonnegative half; for odd N the first abscissa is 0.
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w[i]);
    } else {
      rule.nodes.push_back(-x[i]);
      rule.weights.push_back(w[i]);
      rule.nodes.push_back(x[i]);
      rule.weights.push_back(w[i]);
    }
  }
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int points) {
  static const GaussRule r7 = expand_rule<7>();
  static const GaussRule r10 = expand_rule<10>();
  static const GaussRule r15 = expand_rule<15>();
  static const GaussRule r20 = expand_rule<20>();
  static const GaussRule r25 = expand_rule<25>();
  static const GaussRule r30 = expand_rule<30>();
  switch (points) {
    case 7: return r7;
    case 10: return r10;
    case 15: return r15;
    case 20: return r20;
    case 25: return r25;
    case 30: return r30;
    default: throw DomainError("gauss_legendre: unsupported point count");
  }
}

double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> breaks, int points) {
  if (!(b > a)) return 0.0;
  const GaussRule& rule = gauss_legendre(points);
  breaks.erase(std::remove_if(breaks.begin(), breaks.end(),
                              [&](double t) { return !(t > a && t < b); }),
               breaks.end());
  breaks.push_back(a);
  breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double lo = breaks[k], hi = breaks[k + 1];
    if (hi - lo <= 1e-15 * (1.0 + std::abs(hi))) continue;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * s;
  }
  return total;
}

void parallel_for_chunks(int chunks, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, chunks));
  if (threads == 1) {
    for (int c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        for (int c = next++; c < chunks; c = next++) body(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = chunks;
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace hivelab
