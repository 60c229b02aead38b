#include "plr/rng.hpp"

#include <cmath>

#include "plr/errors.hpp"

namespace plr {

std::uint64_t hash_bytes(const void* data, std::size_t len,
                         std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_string(std::string_view s) {
  return hash_bytes(s.data(), s.size());
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = hash_string(label);
  h = mix64(h ^ mix64(base));
  h = mix64(h ^ mix64(a + 0x9e3779b97f4a7c15ull));
  h = mix64(h ^ mix64(b + 0x7f4a7c159e3779b9ull));
  return h;
}

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
  // splitmix64 expansion; guarantees a nonzero state.
  std::uint64_t sm = seed;
  for (auto& word : s_) {
    sm += 0x9e3779b97f4a7c15ull;
    word = mix64(sm);
  }
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::bounded(std::uint64_t n) {
  if (n == 0) throw ParameterError("Rng::bounded: n must be positive");
  std::uint64_t x = next();
  std::uint64_t r = x % n;
  // Lemire-style rejection of the biased tail.
  while (x - r > std::uint64_t(0) - n) {
    x = next();
    r = x % n;
  }
  return r;
}

double Rng::normal() {
  // Polar method; rejection keeps the stream deterministic per instance.
  for (;;) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

double Rng::lognormal(double log_mean, double log_sd) {
  return std::exp(normal(log_mean, log_sd));
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw ParameterError("Rng::exponential: rate must be > 0");
  return -std::log1p(-uniform()) / rate;
}

int Rng::poisson(double mean) {
  if (mean < 0.0) throw ParameterError("Rng::poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  int count = 0;
  double t = exponential(1.0);
  while (t <= mean) {
    ++count;
    t += exponential(1.0);
  }
  return count;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t k) {
  if (k > n) {
    throw ParameterError("sample_without_replacement: k exceeds population");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(bounded(n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace plr
