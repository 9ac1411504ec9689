#include "hoki/selection.hpp"

#include <cmath>
#include <ostream>

#include "hoki/error.hpp"
#include "hoki/format.hpp"
#include "hoki/metrics.hpp"
#include "hoki/rng.hpp"

namespace hoki {

namespace {

constexpr double kBoxLow = -20.0;
constexpr double kBoxHigh = 20.0;
// Absorbs accumulated rounding when steps do not divide the box exactly.
constexpr double kGridTol = 1e-9;

}  // namespace

std::vector<NoiseSpec> enumerate_grid(const GridConfig& cfg) {
  if (!(cfg.mu_step > 0.0) || !(cfg.sigma_step > 0.0) || !(cfg.uniform_step > 0.0))
    throw InvalidInput("grid steps must be > 0");

  std::vector<NoiseSpec> grid;
  for (std::size_t i = 0;; ++i) {
    const double mu = kBoxLow + static_cast<double>(i) * cfg.mu_step;
    if (mu > kBoxHigh + kGridTol) break;
    for (std::size_t s = 1;; ++s) {
      const double sigma = static_cast<double>(s) * cfg.sigma_step;
      if (sigma > kBoxHigh + kGridTol) break;
      grid.push_back(NoiseSpec::gaussian(mu, sigma));
    }
  }
  for (std::size_t i = 0;; ++i) {
    const double a = kBoxLow + static_cast<double>(i) * cfg.uniform_step;
    if (a >= kBoxHigh - kGridTol) break;
    for (std::size_t s = 1;; ++s) {
      const double b = a + static_cast<double>(s) * cfg.uniform_step;
      if (b > kBoxHigh + kGridTol) break;
      grid.push_back(NoiseSpec::uniform(a, b));
    }
  }
  return grid;
}

CandidateScore single_bin_score(std::span<const double> gammas,
                                std::span<const std::uint8_t> correct,
                                std::size_t m) {
  if (gammas.size() != correct.size())
    throw InvalidInput("gamma/correctness length mismatch");
  if (gammas.empty()) throw InvalidInput("scoring an empty dataset");

  const std::size_t n = gammas.size();
  std::uint64_t correct_total = 0;
  std::uint64_t preserving = 0;
  std::uint64_t preserving_correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cnt = static_cast<std::uint64_t>(
        std::llround(gammas[i] * static_cast<double>(m)));
    preserving += cnt;
    if (correct[i]) {
      ++correct_total;
      preserving_correct += cnt;
    }
  }
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * m;

  CandidateScore score;
  if (preserving == 0 || preserving == pairs) {
    const double accuracy =
        static_cast<double>(correct_total) / static_cast<double>(n);
    score.alpha_hat = accuracy;
    score.beta_hat = accuracy;
    score.sigma_hat = 0.0;  // every confidence collapses to the accuracy
    return score;
  }
  score.alpha_hat = static_cast<double>(preserving_correct) /
                    static_cast<double>(preserving);
  score.beta_hat = static_cast<double>(correct_total * m - preserving_correct) /
                   static_cast<double>(pairs - preserving);

  std::vector<double> confidences(n);
  for (std::size_t i = 0; i < n; ++i)
    confidences[i] =
        (score.alpha_hat - score.beta_hat) * gammas[i] + score.beta_hat;
  score.sigma_hat = confidence_stddev(confidences);
  return score;
}

CandidateScore score_candidate(const LabeledLogits& val, const NoiseSpec& spec,
                               std::size_t m, std::uint64_t seed) {
  const TransformSet ts = sample_transforms(spec, m, val.c, seed);
  const SwitchMatrix sm = switch_matrix(val, ts);
  const std::vector<double> gammas = gamma(sm);
  const std::vector<int> predicted = predicted_labels(val);
  const std::vector<std::uint8_t> correct = correctness(val, predicted);
  return single_bin_score(gammas, correct, m);
}

SelectionResult select_transform(const LabeledLogits& val, const GridConfig& cfg) {
  validate(val);
  SelectionResult result;
  result.candidates = enumerate_grid(cfg);
  if (result.candidates.empty()) throw InvalidInput("empty candidate grid");

  result.scores.resize(result.candidates.size());
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    result.scores[i] = score_candidate(val, result.candidates[i],
                                       cfg.transforms, derive_seed(cfg.seed, i));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.scores.size(); ++i)
    if (result.scores[i].sigma_hat > result.scores[best].sigma_hat) best = i;
  result.best_index = best;
  result.best = result.candidates[best];
  result.best_score = result.scores[best];
  return result;
}

void write_candidate_table_csv(const SelectionResult& result, std::ostream& out) {
  out << "family,param1,param2,alpha_hat,beta_hat,sigma_hat\n";
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    const NoiseSpec& spec = result.candidates[i];
    const CandidateScore& s = result.scores[i];
    if (spec.family == NoiseSpec::Family::kUniform)
      out << "uniform," << format_double(spec.a) << ',' << format_double(spec.b);
    else
      out << "gaussian," << format_double(spec.mu) << ','
          << format_double(spec.sigma);
    out << ',' << format_double(s.alpha_hat) << ',' << format_double(s.beta_hat)
        << ',' << format_double(s.sigma_hat) << '\n';
  }
}

std::string noise_spec_json(const NoiseSpec& spec) {
  if (spec.family == NoiseSpec::Family::kUniform)
    return "{\"family\":\"uniform\",\"a\":" + format_double(spec.a) +
           ",\"b\":" + format_double(spec.b) + "}";
  return "{\"family\":\"gaussian\",\"mu\":" + format_double(spec.mu) +
         ",\"sigma\":" + format_double(spec.sigma) + "}";
}

}  // namespace hoki
