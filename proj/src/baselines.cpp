#include "hoki/baselines.hpp"

#include <cmath>

#include "hoki/error.hpp"

namespace hoki {

double temperature_nll(const LabeledLogits& data, double t) {
  if (!(t > 0.0)) throw InvalidInput("temperature must be > 0");
  double total = 0.0;
  for (std::size_t i = 0; i < data.n; ++i) {
    const std::span<const double> row = data.row(i);
    double max_scaled = row[0] / t;
    for (const double z : row) max_scaled = std::max(max_scaled, z / t);
    double denom = 0.0;
    for (const double z : row) denom += std::exp(z / t - max_scaled);
    const double scaled_label = row[static_cast<std::size_t>(data.labels[i])] / t;
    total += std::log(denom) + max_scaled - scaled_label;
  }
  return total / static_cast<double>(data.n);
}

TemperatureModel temperature_fit(const LabeledLogits& val) {
  validate(val);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(1e-2);
  double hi = std::log(1e2);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = temperature_nll(val, std::exp(x1));
  double f2 = temperature_nll(val, std::exp(x2));

  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = temperature_nll(val, std::exp(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = temperature_nll(val, std::exp(x2));
    }
  }
  return TemperatureModel{std::exp(0.5 * (lo + hi))};
}

double temperature_apply(const TemperatureModel& model,
                         std::span<const double> row) {
  if (!(model.t > 0.0)) throw InvalidInput("temperature must be > 0");
  std::vector<double> scaled(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) scaled[j] = row[j] / model.t;
  return softmax_confidence(scaled);
}

}  // namespace hoki
