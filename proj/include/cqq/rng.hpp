#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace cqq {

// Deterministic, splittable random streams. Every consumer derives its own
// stream from (seed, label, index), so parallel schedules cannot perturb
// results. The generator is xoshiro256++ seeded through splitmix64; all
// floating-point draws go through next_double() to stay bit-identical
// across standard libraries.
class Rng {
 public:
  Rng() : Rng(0, "", 0) {}

  Rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    std::uint64_t k = seed ^ fnv1a(label);
    k += 0x9e3779b97f4a7c15ULL * (index + 1);
    for (auto& w : s_) w = splitmix(k);
  }

  std::uint64_t next_u64() {
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

  // Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard exponential via inversion.
  double exponential() { return -std::log1p(-next_double()); }

  // Flat Dirichlet sample over k coordinates.
  std::vector<double> dirichlet(std::size_t k) {
    std::vector<double> v(k);
    double sum = 0.0;
    for (auto& x : v) {
      x = exponential();
      sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
  }

  // Standard normal (Box-Muller, both values consumed for determinism).
  double gaussian() {
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

  std::uint64_t s_[4];
};

}  // namespace cqq
