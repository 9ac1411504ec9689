#pragma once

#include <cstdint>

namespace hoki {

/// Identifier recorded in model files for the generator/method pair below.
/// Changing either the stream algorithm or the Gaussian method is a format
/// change and must be reflected here.
inline constexpr char kRngAlgorithm[] = "splitmix64/box-muller";

/// splitmix64 finalizer (Steele, Lea & Flood's SplittableRandom mixing step).
std::uint64_t mix64(std::uint64_t x);

/// Deterministic per-candidate / per-chunk seed: mixes a base seed with an
/// index so that work items can be evaluated in any order.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Deterministic 64-bit stream generator with the distribution transforms
/// used throughout the toolkit. The exact output sequence is part of the
/// model-file contract: same seed, same sequence, on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

  /// Uniform on (0, 1); never returns 0 (safe under log()).
  double open01();

  /// Uniform on [a, b).
  double uniform(double a, double b);

  /// Gaussian via Box-Muller, cosine branch only. Consumes two raw draws
  /// per sample so the stream position is input-independent.
  double gaussian(double mu, double sigma);

  /// Gamma(shape, 1) via Marsaglia-Tsang; shape < 1 handled with the
  /// usual Gamma(shape+1) * U^(1/shape) boost.
  double gamma(double shape);

 private:
  std::uint64_t state_;
};

}  // namespace hoki
