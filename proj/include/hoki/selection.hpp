#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hoki/core.hpp"
#include "hoki/transform.hpp"

namespace hoki {

/// Search region for the noise parameters. The boxes are fixed: Gaussian
/// mean in [-20, 20] and standard deviation in (0, 20]; uniform lower bound
/// in [-20, 20) with upper bound in (a, 20]. Only the step sizes vary.
struct GridConfig {
  double mu_step = 1.0;
  double sigma_step = 1.0;
  double uniform_step = 1.0;
  std::size_t transforms = 1000;  // M per candidate
  std::uint64_t seed = 0;
};

/// All candidates in deterministic order: Gaussian specs first (mean, then
/// standard deviation, ascending), then uniform specs (lower bound, then
/// upper bound, ascending). Throws on a non-positive step.
std::vector<NoiseSpec> enumerate_grid(const GridConfig& cfg);

struct CandidateScore {
  double sigma_hat = 0.0;  // population std of the single-bin confidences
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
};

/// Single-bin estimate over all examples: alpha/beta from the pooled
/// label-switch counts (falling back to the overall accuracy when every
/// pair preserves or every pair switches, which forces sigma_hat = 0), then
/// the spread of the per-example calibrated confidences.
CandidateScore single_bin_score(std::span<const double> gammas,
                                std::span<const std::uint8_t> correct,
                                std::size_t m);

/// Samples a transform set for the candidate with the given seed, computes
/// gammas on the validation data, and scores it.
CandidateScore score_candidate(const LabeledLogits& val, const NoiseSpec& spec,
                               std::size_t m, std::uint64_t seed);

struct SelectionResult {
  NoiseSpec best;
  CandidateScore best_score;
  std::size_t best_index = 0;  // position in the candidate table
  std::vector<NoiseSpec> candidates;     // enumeration order
  std::vector<CandidateScore> scores;    // parallel to candidates
};

/// Scores every grid candidate with a per-candidate seed derived from
/// (cfg.seed, candidate index) and returns the sigma_hat maximizer; ties
/// break to the earliest candidate.
SelectionResult select_transform(const LabeledLogits& val, const GridConfig& cfg);

/// CSV rows: family,param1,param2,alpha_hat,beta_hat,sigma_hat
/// (param1/param2 are a/b for uniform and mu/sigma for Gaussian).
void write_candidate_table_csv(const SelectionResult& result, std::ostream& out);

/// The winning spec as a JSON fragment, e.g. {"family":"gaussian",...}.
std::string noise_spec_json(const NoiseSpec& spec);

}  // namespace hoki
