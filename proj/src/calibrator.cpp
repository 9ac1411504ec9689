#include "hoki/calibrator.hpp"

#include <cmath>

#include "hoki/error.hpp"

namespace hoki {

std::optional<double> estimate_alpha(std::span<const std::size_t> members,
                                     const SwitchMatrix& sm,
                                     std::span<const std::uint8_t> correct) {
  std::uint64_t preserving = 0;
  std::uint64_t preserving_correct = 0;
  for (const std::size_t i : members) {
    preserving += sm.preserve_counts[i];
    if (correct[i]) preserving_correct += sm.preserve_counts[i];
  }
  if (preserving == 0) return std::nullopt;
  return static_cast<double>(preserving_correct) / static_cast<double>(preserving);
}

std::optional<double> estimate_beta(std::span<const std::size_t> members,
                                    const SwitchMatrix& sm,
                                    std::span<const std::uint8_t> correct) {
  const std::uint64_t m = sm.transforms;
  std::uint64_t switching = 0;
  std::uint64_t switching_correct = 0;
  for (const std::size_t i : members) {
    const std::uint64_t s = m - sm.preserve_counts[i];
    switching += s;
    if (correct[i]) switching_correct += s;
  }
  if (switching == 0) return std::nullopt;
  return static_cast<double>(switching_correct) / static_cast<double>(switching);
}

std::pair<CalibrationModel, FitDiagnostics> fit(const LabeledLogits& val,
                                                const TransformSet& ts,
                                                const BinPartition& partition,
                                                std::size_t k_max,
                                                InitMode init_mode) {
  validate(val);
  if (ts.c != val.c)
    throw InvalidInput("transform class count does not match dataset");
  if (k_max < 1) throw InvalidInput("k_max must be >= 1");
  if (partition.bins < 1) throw InvalidInput("bin count must be >= 1");

  const std::size_t n = val.n;
  const std::size_t bins = partition.bins;
  const std::uint64_t m = ts.m;

  const std::vector<int> predicted = predicted_labels(val);
  const std::vector<std::uint8_t> correct = correctness(val, predicted);
  std::uint64_t correct_total = 0;
  for (const std::uint8_t ci : correct) correct_total += ci;
  const double p_hat =
      static_cast<double>(correct_total) / static_cast<double>(n);

  const SwitchMatrix sm = switch_matrix(val, ts);
  std::vector<double> gammas = gamma(sm);

  std::vector<double> p(n);
  if (init_mode == InitMode::kValidationAccuracy) {
    for (std::size_t i = 0; i < n; ++i) p[i] = p_hat;
  } else {
    for (std::size_t i = 0; i < n; ++i) p[i] = softmax_confidence(val.row(i));
  }

  CalibrationModel model;
  model.bins = bins;
  model.p_hat = p_hat;
  model.init_mode = init_mode;
  model.transforms = ts;

  FitDiagnostics diag;

  std::vector<std::uint32_t> prev_assign;
  std::vector<std::uint32_t> assign(n);
  std::vector<std::uint64_t> bin_size(bins);
  std::vector<std::uint64_t> bin_correct(bins);
  std::vector<std::uint64_t> bin_preserving(bins);
  std::vector<std::uint64_t> bin_preserving_correct(bins);
  std::vector<double> row_alpha(bins), row_beta(bins);

  for (std::size_t k = 1; k <= k_max; ++k) {
    for (std::size_t i = 0; i < n; ++i)
      assign[i] = static_cast<std::uint32_t>(bin_index(p[i], partition));

    if (k > 1) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (assign[i] != prev_assign[i]) ++changed;
      diag.partition_changes.push_back(changed);
      if (changed == 0) {
        diag.converged = true;
        break;
      }
    }

    std::fill(bin_size.begin(), bin_size.end(), 0);
    std::fill(bin_correct.begin(), bin_correct.end(), 0);
    std::fill(bin_preserving.begin(), bin_preserving.end(), 0);
    std::fill(bin_preserving_correct.begin(), bin_preserving_correct.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t j = assign[i];
      const std::uint64_t cnt = sm.preserve_counts[i];
      ++bin_size[j];
      bin_preserving[j] += cnt;
      if (correct[i]) {
        ++bin_correct[j];
        bin_preserving_correct[j] += cnt;
      }
    }

    for (std::size_t j = 0; j < bins; ++j) {
      const std::uint64_t pairs = bin_size[j] * m;
      const std::uint64_t preserving = bin_preserving[j];
      if (preserving == 0 || preserving == pairs) {
        // All pairs switched or all preserved: both estimators collapse to
        // the bin accuracy. An empty bin falls back to the validation
        // accuracy so a runtime example landing there stays sensible.
        const double value =
            bin_size[j] > 0 ? static_cast<double>(bin_correct[j]) /
                                  static_cast<double>(bin_size[j])
                            : p_hat;
        row_alpha[j] = value;
        row_beta[j] = value;
      } else {
        row_alpha[j] = static_cast<double>(bin_preserving_correct[j]) /
                       static_cast<double>(preserving);
        row_beta[j] =
            static_cast<double>(bin_correct[j] * m - bin_preserving_correct[j]) /
            static_cast<double>(pairs - preserving);
      }
    }

    model.alpha.insert(model.alpha.end(), row_alpha.begin(), row_alpha.end());
    model.beta.insert(model.beta.end(), row_beta.begin(), row_beta.end());
    model.iterations = k;

    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t j = assign[i];
      p[i] = calibrated_step(row_alpha[j], row_beta[j], gammas[i]);
    }

    prev_assign = assign;
  }

  diag.iterations = model.iterations;
  diag.final_residuals = fixed_point_residual(p, gammas, model, partition);
  diag.final_confidences = std::move(p);
  diag.gammas = std::move(gammas);
  return {std::move(model), std::move(diag)};
}

double predict(std::span<const double> logits, const CalibrationModel& model) {
  const int y = argmax_label(logits);
  const TransformSet& ts = model.transforms;
  if (ts.c != logits.size())
    throw InvalidInput("logit length does not match model class count");

  std::uint64_t preserved = 0;
  std::vector<double> transformed(ts.c);
  for (std::size_t i = 0; i < ts.m; ++i) {
    const double* t = ts.noise.data() + i * ts.c;
    for (std::size_t j = 0; j < ts.c; ++j) transformed[j] = logits[j] + t[j];
    if (argmax_label(transformed) == y) ++preserved;
  }
  const double g =
      static_cast<double>(preserved) / static_cast<double>(ts.m);

  const BinPartition partition{model.bins};
  double p = model.init_mode == InitMode::kValidationAccuracy
                 ? model.p_hat
                 : softmax_confidence(logits);
  for (std::size_t k = 0; k < model.iterations; ++k) {
    const std::size_t j = bin_index(p, partition);
    p = calibrated_step(model.alpha_at(k, j), model.beta_at(k, j), g);
  }
  return p;
}

std::vector<Prediction> predict_batch(const LabeledLogits& data,
                                      const CalibrationModel& model) {
  const SwitchMatrix sm = switch_matrix(data, model.transforms);
  const std::vector<double> gammas = gamma(sm);
  const BinPartition partition{model.bins};

  std::vector<Prediction> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    double p = model.init_mode == InitMode::kValidationAccuracy
                   ? model.p_hat
                   : softmax_confidence(data.row(i));
    for (std::size_t k = 0; k < model.iterations; ++k) {
      const std::size_t j = bin_index(p, partition);
      p = calibrated_step(model.alpha_at(k, j), model.beta_at(k, j), gammas[i]);
    }
    out[i].label = argmax_label(data.row(i));
    out[i].confidence = p;
  }
  return out;
}

std::vector<double> fixed_point_residual(std::span<const double> confidences,
                                      std::span<const double> gammas,
                                      const CalibrationModel& model,
                                      const BinPartition& partition) {
  if (confidences.size() != gammas.size())
    throw InvalidInput("confidence/gamma length mismatch");
  if (model.iterations < 1) throw InvalidInput("model has no fitted parameters");

  const std::size_t bins = partition.bins;
  std::vector<double> sum_p(bins, 0.0), sum_g(bins, 0.0);
  std::vector<std::size_t> count(bins, 0);
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const std::size_t j = bin_index(confidences[i], partition);
    sum_p[j] += confidences[i];
    sum_g[j] += gammas[i];
    ++count[j];
  }

  const std::size_t last = model.iterations - 1;
  std::vector<double> residuals(bins, 0.0);
  for (std::size_t j = 0; j < bins; ++j) {
    if (count[j] == 0) continue;
    const double mean_p = sum_p[j] / static_cast<double>(count[j]);
    const double mean_g = sum_g[j] / static_cast<double>(count[j]);
    const double expected = model.alpha_at(last, j) * mean_g +
                            model.beta_at(last, j) * (1.0 - mean_g);
    residuals[j] = std::fabs(mean_p - expected);
  }
  return residuals;
}

}  // namespace hoki
