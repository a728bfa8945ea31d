#include "tnce/numerics/rng.h"

#include <cmath>

#include "tnce/error.h"

namespace tnce {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RngState::RngState(std::uint64_t seed) : seed_(seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t RngState::next_u64() {
  // xoshiro256**
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  ++calls_;
  return result;
}

double RngState::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

std::size_t RngState::uniform_index(std::size_t n) {
  if (n == 0) throw DomainError("uniform_index: n must be positive");
  return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

double RngState::normal() {
  // No spare caching: two raw draws per call keeps the stream position
  // a pure function of the call count.
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();  // log(0) guard; astronomically rare
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngState::normal(double mean, double stddev) {
  return mean + stddev * normal();
}

std::vector<std::size_t> RngState::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw DomainError("sample_without_replacement: k > n");
  // Partial Fisher-Yates over an index vector.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + uniform_index(n - i);
    std::swap(idx[i], idx[j]);
    out.push_back(idx[i]);
  }
  return out;
}

RngState RngState::fork(std::uint64_t stream_id) const {
  std::uint64_t x = seed_ ^ (0xd1b54a32d192ed03ULL * (stream_id + 1));
  std::uint64_t child = splitmix64(x);
  return RngState(child);
}

}  // namespace tnce
