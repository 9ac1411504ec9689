#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hoki/core.hpp"
#include "hoki/transform.hpp"

namespace hoki {

/// Starting confidence for the iterative fit (and for replaying it on new
/// examples): either the validation-set accuracy for every example, or each
/// example's own uncalibrated max-softmax confidence.
enum class InitMode { kValidationAccuracy, kUncalibratedConfidence };

/// Everything the runtime pass needs: the (alpha, beta) pair learned for
/// every (iteration, bin), the validation accuracy used for initialization,
/// and the frozen transformations.
struct CalibrationModel {
  std::size_t bins = 15;        // J
  std::size_t iterations = 0;   // K*, number of parameter rows
  std::vector<double> alpha;    // iterations x bins, row-major
  std::vector<double> beta;     // iterations x bins, row-major
  double p_hat = 0.0;           // validation accuracy
  InitMode init_mode = InitMode::kValidationAccuracy;
  TransformSet transforms;

  double alpha_at(std::size_t k, std::size_t j) const { return alpha[k * bins + j]; }
  double beta_at(std::size_t k, std::size_t j) const { return beta[k * bins + j]; }
};

struct FitDiagnostics {
  bool converged = false;        // last two index partitions were identical
  std::size_t iterations = 0;    // K*
  // Examples whose bin changed between consecutive partitions, one entry per
  // comparison performed (iterations 2, 3, ...). Last entry is 0 iff converged.
  std::vector<std::size_t> partition_changes;
  // Per-bin consistency residuals of the final partition (0 for empty bins).
  std::vector<double> final_residuals;
  // Confidences held when the fit terminated, one per validation example.
  std::vector<double> final_confidences;
  // Label-preservation fractions on the validation set.
  std::vector<double> gammas;
};

/// Accuracy over label-preserving (example, transformation) pairs in the
/// bin. nullopt when the bin has no preserving pair (degenerate bin).
std::optional<double> estimate_alpha(std::span<const std::size_t> members,
                                     const SwitchMatrix& sm,
                                     std::span<const std::uint8_t> correct);

/// Accuracy over label-switching pairs; nullopt when no pair switches.
std::optional<double> estimate_beta(std::span<const std::size_t> members,
                                    const SwitchMatrix& sm,
                                    std::span<const std::uint8_t> correct);

/// One confidence update; shared by fit and predict so the replayed
/// arithmetic is bit-identical. The exact value lies between alpha and
/// beta; the clamp only absorbs ulp-level rounding overshoot past [0, 1],
/// which would otherwise leak out of the bin partition's domain.
inline double calibrated_step(double alpha, double beta, double gamma_value) {
  const double p = (alpha - beta) * gamma_value + beta;
  if (p < 0.0) return 0.0;
  if (p > 1.0) return 1.0;
  return p;
}

/// Iterative design-time fit. Builds the switch matrix exactly once, then
/// repartitions by current confidence, estimates per-bin (alpha, beta) (with
/// the all-preserved/all-switched corner falling back to the bin accuracy,
/// and empty bins to the validation accuracy), and updates member
/// confidences until the partition stops changing or k_max is reached.
std::pair<CalibrationModel, FitDiagnostics> fit(const LabeledLogits& val,
                                                const TransformSet& ts,
                                                const BinPartition& partition,
                                                std::size_t k_max,
                                                InitMode init_mode);

/// Runtime pass for one example: gamma from the stored transformations, then
/// the recorded (alpha, beta) trajectory replayed from the same
/// initialization the fit used.
double predict(std::span<const double> logits, const CalibrationModel& model);

/// Runtime pass over a whole dataset; uses the batched switch kernel and
/// returns (predicted label, calibrated confidence) per example.
std::vector<Prediction> predict_batch(const LabeledLogits& data,
                                      const CalibrationModel& model);

/// Per-bin residual |mean(p) - (alpha_j * mean(gamma) + beta_j * (1 -
/// mean(gamma)))| over the partition induced by `confidences`, using the
/// final iteration's parameters. Zero (up to rounding) whenever the fit
/// converged; empty bins report 0.
std::vector<double> fixed_point_residual(std::span<const double> confidences,
                                      std::span<const double> gammas,
                                      const CalibrationModel& model,
                                      const BinPartition& partition);

}  // namespace hoki
