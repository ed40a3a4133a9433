#pragma once

#include <cstdint>

namespace scorelab {

/// Identifies one reproducible random stream.  The same (master_seed,
/// stream_index) pair always yields the same draw sequence, on any machine,
/// independent of how many other streams exist or in which order they run —
/// which is what makes replicate-parallel simulation order-independent.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Counter-based generator: output i is a 64-bit mix of (key, i), where the
/// key is derived from the SeedSpec.  No hidden state beyond the counter, so
/// streams can be split freely and never collide.
class RandomStream {
 public:
  explicit RandomStream(SeedSpec seed);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1).
  double next_uniform();

  /// Standard normal via Box–Muller (second draw of each pair is cached).
  double next_normal();

  SeedSpec seed() const { return seed_; }

 private:
  SeedSpec seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scorelab
