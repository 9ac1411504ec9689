#include "hoki/core.hpp"

#include <cmath>
#include <string>

#include "hoki/error.hpp"

namespace hoki {

void validate(const LabeledLogits& data) {
  if (data.n < 1) throw InvalidInput("dataset must contain at least one example");
  if (data.c < 2) throw InvalidInput("dataset must have at least two classes");
  if (data.logits.size() != data.n * data.c)
    throw InvalidInput("logit matrix size does not match n * c");
  if (data.labels.size() != data.n)
    throw InvalidInput("label count does not match example count");
  for (std::size_t i = 0; i < data.logits.size(); ++i) {
    if (!std::isfinite(data.logits[i]))
      throw InvalidInput("non-finite logit at flat index " + std::to_string(i));
  }
  for (std::size_t i = 0; i < data.n; ++i) {
    if (data.labels[i] < 0 || static_cast<std::size_t>(data.labels[i]) >= data.c)
      throw InvalidInput("label out of range at example " + std::to_string(i));
  }
}

int argmax_label(std::span<const double> row) {
  if (row.empty()) throw InvalidInput("argmax of an empty row");
  int best = 0;
  double best_value = row[0];
  if (!std::isfinite(best_value)) throw InvalidInput("non-finite logit");
  for (std::size_t j = 1; j < row.size(); ++j) {
    const double v = row[j];
    if (!std::isfinite(v)) throw InvalidInput("non-finite logit");
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(j);
    }
  }
  return best;
}

double softmax_confidence(std::span<const double> row) {
  if (row.empty()) throw InvalidInput("softmax of an empty row");
  double max_value = row[0];
  for (const double v : row) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite logit");
    if (v > max_value) max_value = v;
  }
  double denom = 0.0;
  for (const double v : row) denom += std::exp(v - max_value);
  return 1.0 / denom;
}

std::size_t bin_index(double confidence, const BinPartition& partition) {
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw InvalidInput("confidence outside [0, 1]: " + std::to_string(confidence));
  const std::size_t j =
      static_cast<std::size_t>(confidence * static_cast<double>(partition.bins));
  return j < partition.bins ? j : partition.bins - 1;
}

std::vector<int> predicted_labels(const LabeledLogits& data) {
  std::vector<int> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) out[i] = argmax_label(data.row(i));
  return out;
}

std::vector<std::uint8_t> correctness(const LabeledLogits& data,
                                      std::span<const int> predicted) {
  std::vector<std::uint8_t> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i)
    out[i] = predicted[i] == data.labels[i] ? 1 : 0;
  return out;
}

std::vector<double> uncalibrated_confidences(const LabeledLogits& data) {
  std::vector<double> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) out[i] = softmax_confidence(data.row(i));
  return out;
}

}  // namespace hoki
