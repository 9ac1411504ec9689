#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hoki/core.hpp"

namespace hoki {

/// Noise distribution the transformations are drawn from: either
/// U(a, b) with a < b, or G(mu, sigma) with sigma > 0.
struct NoiseSpec {
  enum class Family { kUniform, kGaussian };

  Family family = Family::kGaussian;
  double a = 0.0;      // uniform lower bound
  double b = 0.0;      // uniform upper bound
  double mu = 0.0;     // gaussian mean
  double sigma = 0.0;  // gaussian standard deviation

  static NoiseSpec uniform(double a, double b);
  static NoiseSpec gaussian(double mu, double sigma);
};

void validate(const NoiseSpec& spec);

/// M sampled transformations. Each transformation is one fixed length-C
/// additive noise vector, drawn once and applied identically to every
/// example at both fit and predict time; the matrix is persisted in the
/// model file so runtime behaviour never depends on resampling.
struct TransformSet {
  NoiseSpec spec;
  std::uint64_t seed = 0;
  std::size_t m = 0;          // transformation count
  std::size_t c = 0;          // class count
  std::vector<double> noise;  // row-major, m * c

  std::span<const double> row(std::size_t i) const {
    return {noise.data() + i * c, c};
  }
};

/// Deterministic in (spec, seed, m, c): entries are drawn row-major from a
/// single SplitMix64 stream seeded with `seed`.
TransformSet sample_transforms(const NoiseSpec& spec, std::size_t m,
                               std::size_t c, std::uint64_t seed);

/// Elementwise sum of a noise vector and a logit row.
std::vector<double> apply(std::span<const double> noise_vec,
                          std::span<const double> row);

/// N x M boolean matrix; entry (i, m) is true when transformation m leaves
/// example i's predicted label unchanged. Row i's mean is gamma_i.
struct SwitchMatrix {
  std::size_t examples = 0;
  std::size_t transforms = 0;
  std::vector<std::uint64_t> bits;             // row-major bitmap
  std::vector<std::uint32_t> preserve_counts;  // per-row popcount

  SwitchMatrix() = default;
  SwitchMatrix(std::size_t n, std::size_t m);

  std::size_t words_per_row() const { return (transforms + 63) / 64; }
  bool preserved(std::size_t i, std::size_t m) const {
    return (bits[i * words_per_row() + m / 64] >> (m % 64)) & 1u;
  }
  void set_preserved(std::size_t i, std::size_t m) {
    bits[i * words_per_row() + m / 64] |= std::uint64_t{1} << (m % 64);
  }
  /// Recompute preserve_counts from the bitmap (used after manual edits).
  void refresh_counts();
};

/// Evaluates argmax(row + noise_m) == argmax(row) for every pair, with the
/// same lowest-index tie-break as argmax_label. The result is bit-identical
/// whether computed sequentially or with row-parallel threads.
SwitchMatrix switch_matrix(const LabeledLogits& data, const TransformSet& ts);

/// Per-example fraction of label-preserving transformations; every value is
/// an exact multiple of 1/M.
std::vector<double> gamma(const SwitchMatrix& sm);

/// Number of switch_matrix evaluations since process start (diagnostic; the
/// fit path is required to build the matrix exactly once).
std::uint64_t switch_matrix_build_count();

}  // namespace hoki
