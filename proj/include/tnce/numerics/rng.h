#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

namespace tnce {

// Self-contained counter-tracked PRNG (xoshiro256** seeded via splitmix64).
// Standard-library distributions are not bit-stable across implementations;
// everything here is, which is what makes run manifests replayable.
// Invariant: identical seed + identical call sequence => identical outputs.
class RngState {
 public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  // Standard normal via Box-Muller; consumes exactly two raw draws per call.
  double normal();
  double normal(double mean, double stddev);

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // k distinct indices from [0, n), in selection order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  // Child stream derived purely from (seed, stream_id); does not advance
  // this generator. Used to hand independent streams to trials/workers.
  RngState fork(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t calls() const { return calls_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t calls_ = 0;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace tnce
