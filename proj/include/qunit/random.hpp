#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qunit {

// Random streams are fully specified so that a seed reproduces the same
// draws on every conforming platform:
//   - engine: std::mt19937_64 (output sequence fixed by the C++ standard)
//   - uniform: top 53 bits of one engine output scaled by 2^-53
//   - normal: Box-Muller, second variate cached
//   - Poisson: multiplication method below mean 10, PTRS (Hormann 1993)
//     transformed rejection at and above 10
// None of the std:: distribution classes are used because their
// algorithms are implementation-defined.
//
// Generator version; bump whenever any of the above changes.
inline constexpr int kRngVersion = 1;

/// Derives an independent stream seed from a root seed, a stage tag and an
/// index (splitmix64 over FNV-1a of the tag). Used for every per-stage and
/// per-setting seed in the project.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  std::int64_t poisson(double mean);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace qunit
