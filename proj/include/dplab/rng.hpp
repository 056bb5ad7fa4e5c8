#pragma once

#include <cstdint>

namespace dplab {

// Independent streams per path. Tags are part of the key, so adding a new
// consumer never perturbs the draws of an existing one.
enum class StreamTag : std::uint64_t {
  brownian = 1,
  jumps = 2,
  barrier = 3,
  crossing = 4,
  refine = 5,
  inner = 6,
  extension = 7,
  jitter = 8,
};

std::uint64_t mix64(std::uint64_t z);

// Seed of path `index` under a master seed. Bundles carry this value.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t index);

// Counter-based generator: draw k of stream (seed, tag) is mix64(key + k*gamma).
// Nothing depends on the order in which paths are visited.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t sub = 0);

  std::uint64_t next_u64() { return at(counter_++); }
  std::uint64_t at(std::uint64_t k) const;

  // Uniform on the open interval (0,1).
  double uniform();
  double uniform_at(std::uint64_t k) const;
  double normal();
  double exponential();
  int poisson(double mean);

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dplab
