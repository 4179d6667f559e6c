#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace eslab {

/// Seeded random stream. One instance per trial; never shared between threads.
///
/// Seeding rule: `Rng(seed)` feeds the two 32-bit halves of `seed` through
/// `std::seed_seq` into a 64-bit Mersenne Twister. `trial_seed(master, k)`
/// derives the seed of trial `k` by running `std::seed_seq` over the halves of
/// `master` and `k`, so per-trial streams depend only on (master, k) and never
/// on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Standard normal draw.
  double normal();

  /// Fills `out` with i.i.d. standard normal draws.
  void fill_normal(std::span<double> out);

  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial);

}  // namespace eslab
