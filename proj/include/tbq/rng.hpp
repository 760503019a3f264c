#pragma once

#include <cstdint>
#include <initializer_list>

#include "tbq/common.hpp"

namespace tbq {

/// Small deterministic generator (SplitMix64 core, Box-Muller normals).
/// Results are identical across platforms and compilers, which is what makes
/// simulation outputs byte-reproducible from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on [-half_width, half_width].
  double uniform_pm(double half_width);

  /// Standard normal.
  double normal();

  /// Proper complex normal with unit variance (real/imag each N(0, 1/2)).
  Complex normal_complex();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derives an independent stream seed from a base seed and a list of indices
/// (network index, trial index, estimator tag, ...).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

}  // namespace tbq
