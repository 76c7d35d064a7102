#pragma once

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/beta_distribution.hpp>
#include <boost/random/binomial_distribution.hpp>
#include <boost/random/discrete_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

#include <cstdint>
#include <span>
#include <utility>

namespace adaptms::util {

/// splitmix64 step; used to derive independent sub-seeds from a base seed.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(mix64(base) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded generator. Boost distributions are used instead of <random> ones because
/// their algorithms are fixed by the library, so draws do not change across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return boost::random::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return boost::random::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return boost::random::normal_distribution<double>(mean, sd)(engine_);
  }
  bool bernoulli(double p) { return boost::random::bernoulli_distribution<double>(p)(engine_); }
  int poisson(double mean) { return boost::random::poisson_distribution<int, double>(mean)(engine_); }
  int binomial(int trials, double p) {
    return boost::random::binomial_distribution<int, double>(trials, p)(engine_);
  }
  double beta(double a, double b) { return boost::random::beta_distribution<double>(a, b)(engine_); }
  std::size_t index(std::size_t n) {
    return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::size_t categorical(std::span<const double> weights) {
    return boost::random::discrete_distribution<std::size_t, double>(weights.begin(),
                                                                     weights.end())(engine_);
  }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[index(i)]);
  }

 private:
  boost::random::mt19937_64 engine_;
};

}  // namespace adaptms::util
