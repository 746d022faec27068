// Counter-based random streams (Philox4x32-10) with portable variate generation.
//
// std:: distributions are implementation-defined, so normal/uniform draws are
// produced here from raw 32-bit words to keep draw sequences identical across
// standard libraries.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rrtime {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  /// The 10-round Philox bijection.
  static Counter block(Counter ctr, Key key);
};

/// A single reproducible stream. `seed` is the Philox key; `stream` selects an
/// independent counter subspace (counter word 3), so streams never overlap.
class RandomStream {
 public:
  using result_type = std::uint32_t;

  explicit RandomStream(std::uint64_t seed, std::uint32_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  int binomial(int n, double p);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint32_t stream_;
  Philox4x32::Key key_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  unsigned used_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic seed splitting: SplitMix64 of master + (index + 1) * golden gamma.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace rrtime
