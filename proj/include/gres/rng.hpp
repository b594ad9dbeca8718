#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace gres {

// splitmix64; used to derive independent sub-seeds from a master seed so that
// stages and components get stable, order-independent streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), h);
}

// Stable sub-seed: seed + label. Distinct labels give unrelated streams.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& label) {
  return splitmix64(master ^ fnv1a64(label));
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& label,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a64(label)) + index);
}

// All sampling goes through hand-rolled transforms on top of mt19937_64 so
// results do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  double uniform() {  // [0, 1)
    return (eng_() >> 11) * (1.0 / 9007199254740992.0);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // modulo bias is irrelevant at the scales used here
    return eng_() % n;
  }

  double normal() {  // Box-Muller, one value per call for simplicity
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // count with support {1, 2, ...}, mean 1/p_success scaled: 1 + Geom(p)
  std::uint32_t one_plus_geometric(double p) {
    std::uint32_t k = 1;
    while (uniform() >= p && k < 64) ++k;
    return k;
  }

  std::uint32_t poisson(double lambda) {
    // Knuth's method; lambda is small everywhere this is used
    double l = std::exp(-lambda);
    std::uint32_t k = 0;
    double prod = 1.0;
    do {
      ++k;
      prod *= uniform();
    } while (prod > l && k < 1000);
    return k - 1;
  }

  // index sampled from unnormalized non-negative weights
  std::size_t weighted(const std::vector<double>& w) {
    double total = 0.0;
    for (double x : w) total += x;
    double r = uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (r < acc) return i;
    }
    return w.size() - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// Binary search over a cumulative weight table; the workhorse for walk and
// negative sampling where the same distribution is sampled many times.
class CumulativeSampler {
 public:
  CumulativeSampler() = default;
  explicit CumulativeSampler(const std::vector<double>& weights) {
    cum_.reserve(weights.size());
    double acc = 0.0;
    for (double w : weights) {
      acc += w;
      cum_.push_back(acc);
    }
  }

  bool empty() const { return cum_.empty() || cum_.back() <= 0.0; }

  std::size_t sample(Rng& rng) const {
    double r = rng.uniform() * cum_.back();
    std::size_t lo = 0, hi = cum_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cum_[mid] <= r)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cum_;
};

}  // namespace gres
