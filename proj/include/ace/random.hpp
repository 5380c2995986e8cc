// Seed derivation and portable random draws.
//
// Every random stream in the toolkit is keyed by (seed, purpose tag, indices)
// through derive_seed, so results never depend on call order or on the number
// of workers. Distributions come from Boost.Random, whose algorithms are fixed
// in source and yield identical draws on every platform.
#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include <boost/random/mersenne_twister.hpp>

namespace ace {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

/// Mixes a base seed with a purpose tag and integer indices.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices = {});

/// Same, with string keys (used for per-(query, product) streams).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::string_view key_a, std::string_view key_b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double normal(double mean = 0.0, double sd = 1.0);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  boost::random::mt19937_64 engine_;
};

/// Inverse-CDF sampler for P(rank = i) proportional to 1 / i^s, i = 1..n.
/// Returns 0-based indices.
class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent);
  std::size_t sample(Rng& rng) const;
  double probability(std::size_t index) const;

 private:
  std::vector<double> cumulative_;
};

}  // namespace ace
