#pragma once

#include <string>
#include <variant>

#include "hoki/baselines.hpp"
#include "hoki/calibrator.hpp"
#include "hoki/core.hpp"

namespace hoki {

/// Dataset files are UTF-8 CSV with LF line endings, header
/// `label,logit_0,...,logit_{C-1}`, one example per row, or the packed
/// little-endian binary variant (8-byte magic "HOKIBIN1", N and C as u64,
/// N*C row-major f64 logits, then N i64 labels). Loading auto-detects the
/// format from the magic bytes.
LabeledLogits load_dataset(const std::string& path);

void save_dataset_csv(const LabeledLogits& data, const std::string& path);
void save_dataset_binary(const LabeledLogits& data, const std::string& path);

using AnyModel = std::variant<CalibrationModel, TemperatureModel>;

/// Model files are versioned JSON with fixed key order and floats written
/// with up to 17 significant digits, so saving the same model twice yields
/// byte-identical files and save/load round-trips every field exactly.
void save_model(const CalibrationModel& model, const std::string& path);
void save_model(const TemperatureModel& model, const std::string& path);

std::string model_to_json(const CalibrationModel& model);
std::string model_to_json(const TemperatureModel& model);

/// Throws VersionError on an unsupported format_version and ParseError on
/// any schema or invariant violation.
AnyModel load_model(const std::string& path);

/// Reads a NoiseSpec JSON fragment as written by the select command, e.g.
/// {"family":"gaussian","mu":0,"sigma":2} or {"family":"uniform","a":-2,"b":4}.
NoiseSpec load_noise_spec(const std::string& path);

}  // namespace hoki
