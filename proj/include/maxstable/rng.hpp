#pragma once

#include <cstdint>
#include <random>

namespace maxstable {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

// Seed of stream `index` within stream family `stream_id` under `root`.
// Depends only on its arguments, so replicate r gets the same stream no
// matter which worker runs it.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream_id, std::uint64_t index);

// Well-known stream families.
namespace streams {
inline constexpr std::uint64_t kReplicate = 1;
inline constexpr std::uint64_t kPilot = 2;
inline constexpr std::uint64_t kTheta4 = 3;
inline constexpr std::uint64_t kCoupling = 4;
inline constexpr std::uint64_t kInner = 5;
inline constexpr std::uint64_t kDirect = 6;
}  // namespace streams

class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  static Rng for_stream(std::uint64_t root, std::uint64_t stream_id, std::uint64_t index) {
    return Rng(derive_seed(root, stream_id, index));
  }

  std::uint64_t seed() const { return seed_; }

  // Uniform on the open interval (0, 1); exact zeros are redrawn.
  double uniform_open();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Unit-mean exponential, strictly positive.
  double exponential();
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace maxstable
