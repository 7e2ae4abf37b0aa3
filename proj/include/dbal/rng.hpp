#ifndef DBAL_RNG_HPP
#define DBAL_RNG_HPP

#include <cstdint>

namespace dbal {

// Counter-based generator built on splitmix64. Every random quantity in the
// library is a pure function of (seed, counter), which keeps trials
// reproducible across platforms and independent of query order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ splitmix64(b));
}

// Uniform double in [0,1) from 53 high bits.
inline double u64_to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  double uniform() { return u64_to_unit(next_u64()); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  int sign() { return (next_u64() & 1u) ? +1 : -1; }

 private:
  std::uint64_t state_;
};

// Rademacher bit xi'_i keyed by (seed, stream index i): reproducible no
// matter when or how often it is queried.
inline int rademacher_bit(std::uint64_t seed, std::uint64_t index) {
  return (hash_combine(seed, index) & 1u) ? +1 : -1;
}

// Derived stream for trial `k` of a campaign with master seed `seed`.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t k) {
  return hash_combine(master_seed, 0x747269616cULL + k);
}

}  // namespace dbal

#endif  // DBAL_RNG_HPP
