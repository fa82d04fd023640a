#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "softcache/errors.hpp"

// Seeded randomness helpers. std::mt19937_64 is bit-reproducible across
// platforms but the std:: distributions are not, so sampling is done by hand.

namespace softcache {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent sub-seeds from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive the sub-seed for a named stream, e.g. derive_seed(seed, "sim", rep).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = base;
  for (char c : tag) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
  return splitmix64(h ^ splitmix64(index));
}

/// Uniform double in [0, 1), 53-bit resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_index: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Cumulative-weight table for repeated discrete sampling.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& weights) {
    cum_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw ValidationError("DiscreteSampler: negative weight");
      acc += w;
      cum_.push_back(acc);
    }
    if (cum_.empty() || acc <= 0.0)
      throw ValidationError("DiscreteSampler: weights must have positive total");
    total_ = acc;
  }

  std::size_t sample(Rng& rng) const {
    const double u = uniform01(rng) * total_;
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cum_;
  double total_ = 0.0;
};

}  // namespace softcache
