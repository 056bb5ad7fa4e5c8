#include "dplab/rng.hpp"

#include <cmath>
#include <numbers>

namespace dplab {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

double to_open_unit(std::uint64_t v) {
  return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t path_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master + kGamma) ^ (index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL));
}

CounterRng::CounterRng(std::uint64_t seed, StreamTag tag, std::uint64_t sub) {
  std::uint64_t k = mix64(seed ^ 0x243F6A8885A308D3ULL);
  k = mix64(k + static_cast<std::uint64_t>(tag) * kGamma);
  key_ = mix64(k ^ (sub * 0xA0761D6478BD642FULL));
}

std::uint64_t CounterRng::at(std::uint64_t k) const { return mix64(key_ + (k + 1) * kGamma); }

double CounterRng::uniform() { return to_open_unit(next_u64()); }

double CounterRng::uniform_at(std::uint64_t k) const { return to_open_unit(at(k)); }

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double CounterRng::exponential() { return -std::log(uniform()); }

int CounterRng::poisson(double mean) {
  // Inter-arrival counting; rates here are small (λT of a few units).
  int k = 0;
  double acc = exponential();
  while (acc <= mean) {
    ++k;
    acc += exponential();
  }
  return k;
}

}  // namespace dplab
