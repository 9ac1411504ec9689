#include <cmath>
#include <vector>

#include <doctest.h>

#include "hoki/baselines.hpp"
#include "hoki/core.hpp"
#include "hoki/error.hpp"
#include "hoki/synth.hpp"

TEST_CASE("temperature_fit recovers the generating scale") {
  // Logits that are exact log-probabilities are already calibrated: T ~ 1.
  const hoki::LabeledLogits calibrated = hoki::generate({50000, 10, 0.5, 1.0, 71});
  const hoki::TemperatureModel t1 = hoki::temperature_fit(calibrated);
  CHECK(t1.t > 0.0);
  CHECK(std::fabs(t1.t - 1.0) <= 0.05);

  // Doubling the logits doubles the optimal temperature.
  const hoki::LabeledLogits doubled = hoki::generate({50000, 10, 0.5, 2.0, 71});
  const hoki::TemperatureModel t2 = hoki::temperature_fit(doubled);
  CHECK(std::fabs(t2.t - 2.0) <= 0.1);
}

TEST_CASE("fitted NLL does not exceed the identity temperature") {
  const hoki::LabeledLogits data = hoki::generate({5000, 10, 0.5, 3.0, 72});
  const hoki::TemperatureModel model = hoki::temperature_fit(data);
  CHECK(hoki::temperature_nll(data, model.t) <=
        hoki::temperature_nll(data, 1.0) + 1e-9);
}

TEST_CASE("temperature_apply basics") {
  const std::vector<double> row{2.0, 0.0};
  CHECK(hoki::temperature_apply({1.0}, row) == hoki::softmax_confidence(row));
  CHECK(hoki::temperature_apply({1e6}, row) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK_THROWS_AS(hoki::temperature_apply({0.0}, row), hoki::InvalidInput);
}

TEST_CASE("temperature scaling never changes the predicted label") {
  const hoki::LabeledLogits data = hoki::generate({200, 7, 0.5, 2.0, 73});
  for (const double t : {0.01, 0.5, 1.0, 3.0, 100.0}) {
    for (std::size_t i = 0; i < data.n; ++i) {
      std::vector<double> scaled(data.c);
      for (std::size_t j = 0; j < data.c; ++j) scaled[j] = data.logits[i * data.c + j] / t;
      CHECK(hoki::argmax_label(scaled) == hoki::argmax_label(data.row(i)));
    }
  }
}

TEST_CASE("temperature_fit rejects an empty dataset") {
  hoki::LabeledLogits empty;
  CHECK_THROWS_AS(hoki::temperature_fit(empty), hoki::InvalidInput);
}
