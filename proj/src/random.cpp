#include "ace/random.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/random/beta_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace ace {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(seed ^ fnv1a64(tag));
  for (std::uint64_t i : indices) h = splitmix64(h ^ splitmix64(i));
  return h;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                          std::string_view key_a, std::string_view key_b) {
  return derive_seed(seed, tag, {fnv1a64(key_a), fnv1a64(key_b)});
}

double Rng::uniform() {
  return boost::random::uniform_01<double>()(engine_);
}

double Rng::normal(double mean, double sd) {
  return boost::random::normal_distribution<double>(mean, sd)(engine_);
}

double Rng::beta(double a, double b) {
  return boost::random::beta_distribution<double>(a, b)(engine_);
}

ZipfSampler::ZipfSampler(std::size_t n, double exponent) {
  if (n == 0) throw std::invalid_argument("ZipfSampler: n must be >= 1");
  if (!(exponent > 0)) throw std::invalid_argument("ZipfSampler: exponent must be > 0");
  cumulative_.resize(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total += std::pow(static_cast<double>(i + 1), -exponent);
    cumulative_[i] = total;
  }
  for (double& c : cumulative_) c /= total;
  cumulative_.back() = 1.0;
}

std::size_t ZipfSampler::sample(Rng& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
}

double ZipfSampler::probability(std::size_t index) const {
  return index == 0 ? cumulative_[0] : cumulative_[index] - cumulative_[index - 1];
}

}  // namespace ace
