#include <cmath>
#include <vector>

#include <doctest.h>

#include "hoki/core.hpp"
#include "hoki/error.hpp"
#include "hoki/metrics.hpp"
#include "hoki/synth.hpp"

TEST_CASE("generate is deterministic in the seed") {
  const hoki::SynthConfig cfg{300, 6, 0.5, 2.0, 42};
  const hoki::LabeledLogits a = hoki::generate(cfg);
  const hoki::LabeledLogits b = hoki::generate(cfg);
  CHECK(a.logits == b.logits);
  CHECK(a.labels == b.labels);
  const hoki::LabeledLogits c = hoki::generate({300, 6, 0.5, 2.0, 43});
  CHECK(a.logits != c.logits);
}

TEST_CASE("generate validates its configuration") {
  CHECK_THROWS_AS(hoki::generate({0, 6, 0.5, 1.0, 1}), hoki::InvalidInput);
  CHECK_THROWS_AS(hoki::generate({10, 1, 0.5, 1.0, 1}), hoki::InvalidInput);
  CHECK_THROWS_AS(hoki::generate({10, 6, 0.0, 1.0, 1}), hoki::InvalidInput);
  CHECK_THROWS_AS(hoki::generate({10, 6, 0.5, 0.0, 1}), hoki::InvalidInput);
}

TEST_CASE("softmax of logits/distortion recovers the generating probabilities") {
  const hoki::LabeledLogits data = hoki::generate({200, 8, 0.5, 3.0, 44});
  hoki::validate(data);
  for (std::size_t i = 0; i < data.n; ++i) {
    std::vector<double> scaled(data.c);
    double total = 0.0;
    for (std::size_t j = 0; j < data.c; ++j) {
      scaled[j] = std::exp(data.logits[i * data.c + j] / 3.0);
      total += scaled[j];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("distortion 1 is calibrated, distortion 3 is overconfident") {
  const hoki::BinPartition partition{15};

  const hoki::LabeledLogits calibrated = hoki::generate({50000, 10, 0.5, 1.0, 45});
  const std::vector<int> pred1 = hoki::predicted_labels(calibrated);
  const std::vector<std::uint8_t> correct1 = hoki::correctness(calibrated, pred1);
  const double ece1 =
      hoki::ece(hoki::uncalibrated_confidences(calibrated), correct1, partition);
  CHECK(ece1 < 0.015);

  const hoki::LabeledLogits overconfident = hoki::generate({50000, 10, 0.5, 3.0, 45});
  const std::vector<int> pred3 = hoki::predicted_labels(overconfident);
  const std::vector<std::uint8_t> correct3 = hoki::correctness(overconfident, pred3);
  const double ece3 =
      hoki::ece(hoki::uncalibrated_confidences(overconfident), correct3, partition);
  CHECK(ece3 > 0.05);

  // Overconfidence means mean confidence exceeds accuracy.
  double acc = 0.0, conf = 0.0;
  const std::vector<double> confidences = hoki::uncalibrated_confidences(overconfident);
  for (std::size_t i = 0; i < overconfident.n; ++i) {
    acc += correct3[i];
    conf += confidences[i];
  }
  CHECK(conf / 50000.0 > acc / 50000.0);
}

TEST_CASE("empirical accuracy tracks the mean top probability") {
  const hoki::LabeledLogits data = hoki::generate({50000, 10, 0.5, 1.0, 46});
  const std::vector<int> predicted = hoki::predicted_labels(data);
  double correct = 0.0;
  double mean_top = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    correct += predicted[i] == data.labels[i] ? 1.0 : 0.0;
    mean_top += hoki::softmax_confidence(data.row(i));  // distortion 1: = p_max
  }
  CHECK(std::fabs(correct / 50000.0 - mean_top / 50000.0) <= 0.02);
}
