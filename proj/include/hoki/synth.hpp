#pragma once

#include <cstdint>

#include "hoki/core.hpp"

namespace hoki {

/// Synthetic miscalibrated-classifier generator. Each example draws a class
/// distribution from a symmetric Dirichlet(concentration), samples the true
/// label from it, and emits logits = distortion * log(probabilities).
/// distortion = 1 is calibrated by construction (the max-softmax confidence
/// equals the true probability of being correct); distortion > 1 is
/// overconfident.
struct SynthConfig {
  std::size_t n = 1000;
  std::size_t classes = 10;
  double concentration = 0.5;  // wide confidence spread at the default
  double distortion = 1.0;
  std::uint64_t seed = 0;
};

LabeledLogits generate(const SynthConfig& cfg);

}  // namespace hoki
