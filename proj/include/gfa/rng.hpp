#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace gfa {

/// Philox4x32-10 counter-based bit generator. The 64-bit seed is the key and
/// the 128-bit counter advances once per block of four outputs.
class Philox4x32 {
public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;

  explicit Philox4x32(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Raw bijection, exposed for known-answer tests.
  static Block encrypt(Block counter, std::array<std::uint32_t, 2> key);

private:
  std::array<std::uint32_t, 2> key_{};
  Block counter_{};
  Block output_{};
  int next_ = 4;
};

/// Per-chain random source. Owns the engine and the distribution objects so
/// that a chain's draw sequence is fully determined by its seed.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform();  // in [0, 1)
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t uniform_index(std::uint64_t n);  // in [0, n)

  Philox4x32& engine() { return engine_; }

private:
  Philox4x32 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gfa
