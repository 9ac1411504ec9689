#include "hoki/synth.hpp"

#include <cmath>

#include "hoki/error.hpp"
#include "hoki/rng.hpp"

namespace hoki {

LabeledLogits generate(const SynthConfig& cfg) {
  if (cfg.n < 1) throw InvalidInput("example count must be >= 1");
  if (cfg.classes < 2) throw InvalidInput("class count must be >= 2");
  if (!(cfg.concentration > 0.0)) throw InvalidInput("concentration must be > 0");
  if (!(cfg.distortion > 0.0)) throw InvalidInput("distortion must be > 0");

  LabeledLogits data;
  data.n = cfg.n;
  data.c = cfg.classes;
  data.logits.resize(cfg.n * cfg.classes);
  data.labels.resize(cfg.n);

  SplitMix64 rng(cfg.seed);
  std::vector<double> probs(cfg.classes);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < cfg.classes; ++j) {
      probs[j] = rng.gamma(cfg.concentration);
      sum += probs[j];
    }
    double* row = data.logits.data() + i * cfg.classes;
    for (std::size_t j = 0; j < cfg.classes; ++j) {
      // Extreme Gamma underflow would give log(0); keep logits finite.
      probs[j] = std::max(probs[j] / sum, 1e-300);
      row[j] = cfg.distortion * std::log(probs[j]);
    }

    const double u = rng.uniform01();
    double cdf = 0.0;
    int label = static_cast<int>(cfg.classes) - 1;
    for (std::size_t j = 0; j < cfg.classes; ++j) {
      cdf += probs[j];
      if (u < cdf) {
        label = static_cast<int>(j);
        break;
      }
    }
    data.labels[i] = label;
  }
  return data;
}

}  // namespace hoki
