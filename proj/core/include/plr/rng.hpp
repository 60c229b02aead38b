#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace plr {

// splitmix64 finalizer. Good avalanche, used for seed expansion and hashing.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// FNV-1a over raw bytes. Stable across platforms and releases.
std::uint64_t hash_bytes(const void* data, std::size_t len,
                         std::uint64_t seed = 0xcbf29ce484222325ull);

std::uint64_t hash_string(std::string_view s);

// Derives an independent stream seed from a base seed, a label and up to two
// indices. Every piece of randomness in the library flows through this, so
// results are reproducible regardless of evaluation order or thread count.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// xoshiro256++ with hand-rolled distributions. The standard library leaves
// distribution algorithms implementation-defined; rolling them here keeps
// generated corpora byte-identical across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n), unbiased (Lemire rejection). n must be > 0.
  std::uint64_t bounded(std::uint64_t n);

  // Standard normal via the polar method.
  double normal();
  double normal(double mean, double sd);

  // exp(normal(log_mean, log_sd))
  double lognormal(double log_mean, double log_sd);

  // Exponential with the given rate (> 0).
  double exponential(double rate);

  // Poisson count, inversion by exponential inter-arrival times.
  int poisson(double mean);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(bounded(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Draws k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::array<std::uint64_t, 4> s_;
};

}  // namespace plr
