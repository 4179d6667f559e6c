#include "eslab/random.hpp"

#include <array>

#include <boost/random/normal_distribution.hpp>

namespace eslab {
namespace {

constexpr std::uint32_t lo32(std::uint64_t x) { return static_cast<std::uint32_t>(x); }
constexpr std::uint32_t hi32(std::uint64_t x) { return static_cast<std::uint32_t>(x >> 32); }

std::mt19937_64 make_engine(std::uint64_t seed) {
  std::seed_seq seq{lo32(seed), hi32(seed)};
  return std::mt19937_64(seq);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(make_engine(seed)) {}

double Rng::normal() {
  // Ziggurat sampler; stateless between calls, so constructing it per call is free.
  boost::random::normal_distribution<double> dist;
  return dist(engine_);
}

void Rng::fill_normal(std::span<double> out) {
  boost::random::normal_distribution<double> dist;
  for (double& x : out) x = dist(engine_);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) {
  std::seed_seq seq{lo32(master), hi32(master), lo32(trial), hi32(trial)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[1]) << 32) | words[0];
}

}  // namespace eslab
