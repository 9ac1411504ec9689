#pragma once

#include <span>

#include "hoki/core.hpp"

namespace hoki {

/// Temperature-scaling baseline: divide every logit by a single learned
/// scalar T > 0 before the softmax.
struct TemperatureModel {
  double t = 1.0;
};

/// Mean negative log-likelihood of softmax(logits / t) at the true labels.
double temperature_nll(const LabeledLogits& data, double t);

/// Minimizes the NLL by golden-section search on log T over [1e-2, 1e2]
/// (interval tolerance 1e-6). The NLL is unimodal in T for fixed logits in
/// practice, so the derivative-free search is sufficient.
TemperatureModel temperature_fit(const LabeledLogits& val);

/// softmax_confidence(row / T); never changes the predicted label.
double temperature_apply(const TemperatureModel& model,
                         std::span<const double> row);

}  // namespace hoki
