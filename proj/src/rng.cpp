#include "maxstable/rng.hpp"

#include <cmath>

namespace maxstable {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream_id, std::uint64_t index) {
  return mix64(mix64(mix64(root) ^ stream_id) ^ index);
}

double Rng::uniform_open() {
  for (;;) {
    // 53 random mantissa bits.
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

double Rng::exponential() { return -std::log(uniform_open()); }

double Rng::normal() { return normal_(engine_); }

}  // namespace maxstable
