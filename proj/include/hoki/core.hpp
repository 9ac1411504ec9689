#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hoki {

/// N x C logit matrix plus ground-truth labels; the only view of the
/// classifier the toolkit ever sees.
struct LabeledLogits {
  std::vector<double> logits;  // row-major, n * c entries
  std::vector<int> labels;     // n entries, each in [0, c)
  std::size_t n = 0;
  std::size_t c = 0;

  std::span<const double> row(std::size_t i) const {
    return {logits.data() + i * c, c};
  }
};

/// Throws InvalidInput unless n >= 1, c >= 2, dimensions match, every logit
/// is finite, and every label is in [0, c).
void validate(const LabeledLogits& data);

/// J equal-width confidence bins over [0,1]: [j/J, (j+1)/J) for j < J-1 and
/// [(J-1)/J, 1] for the last bin, so 1.0 is representable.
struct BinPartition {
  std::size_t bins = 15;

  double lower(std::size_t j) const {
    return static_cast<double>(j) / static_cast<double>(bins);
  }
  double upper(std::size_t j) const {
    return static_cast<double>(j + 1) / static_cast<double>(bins);
  }
};

struct Prediction {
  int label = 0;
  double confidence = 0.0;  // in [0, 1]
};

/// Index of the row maximum; ties break to the lowest index so results are
/// reproducible across platforms. Throws InvalidInput on an empty row or a
/// non-finite entry.
int argmax_label(std::span<const double> row);

/// Max-softmax probability of the row, computed with the row maximum
/// subtracted before exponentiation. Invariant under adding a constant to
/// all entries; equals 1/C exactly for an all-equal row.
double softmax_confidence(std::span<const double> row);

/// min(floor(confidence * J), J - 1). Throws InvalidInput outside [0, 1].
std::size_t bin_index(double confidence, const BinPartition& partition);

/// argmax_label applied to every row.
std::vector<int> predicted_labels(const LabeledLogits& data);

/// Per-example indicator of predicted label == true label (0 or 1).
std::vector<std::uint8_t> correctness(const LabeledLogits& data,
                                      std::span<const int> predicted);

/// softmax_confidence applied to every row.
std::vector<double> uncalibrated_confidences(const LabeledLogits& data);

}  // namespace hoki
