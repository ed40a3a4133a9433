#include "scorelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace scorelab {

namespace {

// splitmix64 finalizer: a bijective 64-bit mix with full avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kStep = 0x9e3779b97f4a7c15ULL;

}  // namespace

RandomStream::RandomStream(SeedSpec seed) : seed_(seed) {
  // Two mixing rounds separate master seed and stream index so that
  // neighbouring streams share no structure.
  key_ = mix64(mix64(seed.master_seed) ^
               (seed.stream_index * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
}

std::uint64_t RandomStream::next_u64() { return mix64(key_ + kStep * ++counter_); }

double RandomStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = next_uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;  // keep log() finite
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

}  // namespace scorelab
