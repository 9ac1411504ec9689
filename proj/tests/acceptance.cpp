// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavier than the unit tests; pinned seeds throughout.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hoki/baselines.hpp"
#include "hoki/bounds.hpp"
#include "hoki/calibrator.hpp"
#include "hoki/core.hpp"
#include "hoki/io.hpp"
#include "hoki/metrics.hpp"
#include "hoki/selection.hpp"
#include "hoki/synth.hpp"
#include "hoki/transform.hpp"
#include "../tests/oracles.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool gamma_is_exact_multiple(double g, std::size_t m) {
  const double scaled = g * static_cast<double>(m);
  const double rounded = std::floor(scaled + 0.5);
  if (rounded < 0.0 || rounded > static_cast<double>(m)) return false;
  return g == rounded / static_cast<double>(m);
}

// --------------------------------------------------------------------------
// 1. ECE oracle equivalence on random instances
// --------------------------------------------------------------------------
Outcome criterion_ece_oracle() {
  const auto start = clock_type::now();
  std::mt19937_64 rng(1001);
  const std::size_t bin_choices[] = {1, 2, 5, 15, 100};

  double worst = 0.0;
  for (int trial = 0; trial < 1200; ++trial) {
    const std::size_t n = 1 + oracles::uniform_index(rng, 50);
    const std::size_t c = 2 + oracles::uniform_index(rng, 4);
    const std::size_t bins = bin_choices[oracles::uniform_index(rng, 5)];

    std::vector<double> conf(n);
    std::vector<std::uint8_t> correct(n);
    std::vector<double> row(c);
    for (std::size_t i = 0; i < n; ++i) {
      for (double& v : row) v = oracles::uniform(rng, -8.0, 8.0);
      conf[i] = hoki::softmax_confidence(row);
      correct[i] = static_cast<std::uint8_t>(rng() & 1);
    }
    const double expected = oracles::ece_bruteforce(conf, correct, bins);
    const double actual = hoki::ece(conf, correct, hoki::BinPartition{bins});
    worst = std::max(worst, std::fabs(actual - expected));
    if (worst > 1e-12) {
      return {false, "mismatch " + std::to_string(worst) + " at trial " +
                         std::to_string(trial)};
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "1200 instances, max |diff| = " << worst << ", " << elapsed << " s";
  return {elapsed < 10.0, detail.str()};
}

// --------------------------------------------------------------------------
// 2 & 3. Fixed-point residuals and replay equivalence over 20 seeded fits
// --------------------------------------------------------------------------
struct FixedPointResults {
  Outcome residuals;
  Outcome replay;
};

FixedPointResults criterion_fixed_point_and_replay() {
  const std::size_t seeds = 20;
  std::size_t converged_count = 0;
  double worst_residual = 0.0;
  double worst_replay = 0.0;

  for (std::size_t s = 0; s < seeds; ++s) {
    const hoki::LabeledLogits val =
        hoki::generate({5000, 10, 0.5, 3.0, 2000 + s});
    const hoki::TransformSet ts = hoki::sample_transforms(
        hoki::NoiseSpec::gaussian(0.0, 2.0), 200, 10, 3000 + s);
    const auto [model, diag] = hoki::fit(val, ts, hoki::BinPartition{15}, 100,
                                         hoki::InitMode::kValidationAccuracy);
    if (diag.converged) {
      ++converged_count;
      for (const double r : diag.final_residuals)
        worst_residual = std::max(worst_residual, r);
    }
    const std::vector<hoki::Prediction> replay = hoki::predict_batch(val, model);
    for (std::size_t i = 0; i < replay.size(); ++i)
      worst_replay = std::max(
          worst_replay, std::fabs(replay[i].confidence - diag.final_confidences[i]));
  }

  FixedPointResults out;
  {
    std::ostringstream detail;
    detail << converged_count << "/" << seeds
           << " fits converged, max residual = " << worst_residual;
    out.residuals = {converged_count > 0 && worst_residual <= 1e-10, detail.str()};
  }
  {
    std::ostringstream detail;
    detail << "max |predict - fit confidence| = " << worst_replay << " over "
           << seeds << " fits";
    out.replay = {worst_replay <= 1e-12, detail.str()};
  }
  return out;
}

// --------------------------------------------------------------------------
// 4 & 9. Calibration improvement on overconfident synthetic data, plus
// gamma granularity over the same runs
// --------------------------------------------------------------------------
struct ImprovementResults {
  Outcome improvement;
  Outcome granularity;
};

ImprovementResults criterion_improvement_and_granularity() {
  const std::size_t seeds = 10;
  const std::size_t n = 10000;
  const std::size_t m = 1000;
  const hoki::BinPartition partition{15};

  std::vector<double> uncal_eces, hoki_eces, temp_eces;
  bool hoki_beats_uncal = true;
  bool gammas_exact = true;
  std::size_t gamma_checked = 0;

  for (std::size_t s = 0; s < seeds; ++s) {
    const hoki::LabeledLogits all =
        hoki::generate({2 * n, 10, 0.5, 3.0, 4000 + s});
    hoki::LabeledLogits val, test;
    val.n = test.n = n;
    val.c = test.c = 10;
    val.logits.assign(all.logits.begin(), all.logits.begin() + n * 10);
    val.labels.assign(all.labels.begin(), all.labels.begin() + n);
    test.logits.assign(all.logits.begin() + n * 10, all.logits.end());
    test.labels.assign(all.labels.begin() + n, all.labels.end());

    const std::vector<int> test_pred = hoki::predicted_labels(test);
    const std::vector<std::uint8_t> test_correct = hoki::correctness(test, test_pred);

    const double uncal =
        hoki::ece(hoki::uncalibrated_confidences(test), test_correct, partition);
    uncal_eces.push_back(uncal);

    // Noise chosen the same way the CLI pipeline does it: coarse grid search
    // maximizing the single-bin confidence spread on the validation split.
    hoki::GridConfig grid;
    grid.mu_step = grid.sigma_step = grid.uniform_step = 10.0;
    grid.transforms = m;
    grid.seed = 5000 + s;
    const hoki::SelectionResult selected = hoki::select_transform(val, grid);

    const hoki::TransformSet ts =
        hoki::sample_transforms(selected.best, m, 10, 6000 + s);
    const auto [model, diag] = hoki::fit(val, ts, partition, 100,
                                         hoki::InitMode::kValidationAccuracy);

    const std::vector<hoki::Prediction> predictions = hoki::predict_batch(test, model);
    std::vector<double> hoki_conf(test.n);
    for (std::size_t i = 0; i < test.n; ++i) hoki_conf[i] = predictions[i].confidence;
    const double hoki_ece = hoki::ece(hoki_conf, test_correct, partition);
    hoki_eces.push_back(hoki_ece);
    if (!(hoki_ece < uncal)) hoki_beats_uncal = false;

    const hoki::TemperatureModel temp = hoki::temperature_fit(val);
    std::vector<double> temp_conf(test.n);
    for (std::size_t i = 0; i < test.n; ++i)
      temp_conf[i] = hoki::temperature_apply(temp, test.row(i));
    temp_eces.push_back(hoki::ece(temp_conf, test_correct, partition));

    // gamma granularity on both splits (criterion 9)
    for (const double g : diag.gammas) {
      gammas_exact = gammas_exact && gamma_is_exact_multiple(g, m);
      ++gamma_checked;
    }
    const hoki::SwitchMatrix test_sm = hoki::switch_matrix(test, model.transforms);
    for (const double g : hoki::gamma(test_sm)) {
      gammas_exact = gammas_exact && gamma_is_exact_multiple(g, m);
      ++gamma_checked;
    }
  }

  const double hoki_median = median(hoki_eces);
  const double temp_median = median(temp_eces);

  ImprovementResults out;
  {
    std::ostringstream detail;
    detail << "median ECE uncal/temp/hoki = " << median(uncal_eces) << "/"
           << temp_median << "/" << hoki_median
           << (hoki_beats_uncal ? "; hoki < uncal on 10/10 seeds"
                                : "; hoki >= uncal on some seed");
    const bool temp_ok = hoki_median < temp_median + 0.005;
    out.improvement = {hoki_beats_uncal && temp_ok, detail.str()};
  }
  {
    std::ostringstream detail;
    detail << gamma_checked << " gammas checked, all exact multiples of 1/M: "
           << (gammas_exact ? "yes" : "no");
    out.granularity = {gammas_exact && gamma_checked > 0, detail.str()};
  }
  return out;
}

// --------------------------------------------------------------------------
// 5. Temperature recovery on distortion-T data
// --------------------------------------------------------------------------
Outcome criterion_temperature_recovery() {
  const hoki::LabeledLogits d1 = hoki::generate({50000, 10, 0.5, 1.0, 7001});
  const double t1 = hoki::temperature_fit(d1).t;
  const hoki::LabeledLogits d2 = hoki::generate({50000, 10, 0.5, 2.0, 7002});
  const double t2 = hoki::temperature_fit(d2).t;
  std::ostringstream detail;
  detail << "T(distortion 1) = " << t1 << ", T(distortion 2) = " << t2;
  return {std::fabs(t1 - 1.0) <= 0.05 && std::fabs(t2 - 2.0) <= 0.1, detail.str()};
}

// --------------------------------------------------------------------------
// 6. Bound closed form and monotonicity
// --------------------------------------------------------------------------
Outcome criterion_bound_arithmetic() {
  // Closed form evaluated independently in extended precision.
  const long double reference =
      0.01L + 15.0L * std::sqrt(2.0L) / std::sqrt(25000.0L) *
                  std::sqrt(2.0L * std::log(2.0L) - std::log(0.1L));
  const double eps = hoki::ce_bound({0.01, 15, 25000, 0.1});
  const double diff = std::fabs(eps - static_cast<double>(reference));
  if (diff > 1e-6)
    return {false, "closed-form mismatch: " + std::to_string(diff)};

  std::mt19937_64 rng(8001);
  for (int trial = 0; trial < 100; ++trial) {
    const double ece = oracles::uniform01(rng);
    const std::size_t bins = 1 + oracles::uniform_index(rng, 60);
    const std::uint64_t n = 1 + oracles::uniform_index(rng, 200000);
    const double delta = oracles::uniform(rng, 1e-6, 1.0);
    const double base = hoki::ce_bound({ece, bins, n, delta});
    if (!(base > ece)) return {false, "bound did not exceed the observed ECE"};
    if (!(hoki::ce_bound({ece, bins, 4 * n, delta}) < base))
      return {false, "bound not decreasing in N"};
    if (!(hoki::ce_bound({ece, bins + 1, n, delta}) > base))
      return {false, "bound not increasing in J"};
    if (!(hoki::ce_bound({ece, bins, n, delta * 0.5}) > base))
      return {false, "bound not increasing in 1/delta"};
  }
  std::ostringstream detail;
  detail << "ce_bound(0.01,15,25000,0.1) = " << eps << " (|diff| = " << diff
         << "), monotone on 100-point sweep";
  return {true, detail.str()};
}

// --------------------------------------------------------------------------
// 7. End-to-end determinism through the CLI
// --------------------------------------------------------------------------
std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome criterion_determinism() {
  const char* cli = std::getenv("HOKI_CLI_PATH");
  if (cli == nullptr) return {false, "HOKI_CLI_PATH not set"};

  const std::filesystem::path base =
      std::filesystem::temp_directory_path() / "hoki_acceptance_determinism";
  std::filesystem::remove_all(base);

  auto run_pipeline = [&](const std::string& tag) -> bool {
    const std::filesystem::path dir = base / tag;
    std::filesystem::create_directories(dir);
    const std::string d = dir.string();
    const std::string cli_s(cli);
    const std::vector<std::string> commands = {
        cli_s + " synth --n 2000 --classes 10 --distortion 3 --seed 101" +
            " --out-val " + d + "/val.csv --out-test " + d + "/test.csv",
        cli_s + " select --val " + d + "/val.csv --grid-step 10 --m 200" +
            " --seed 102 --out-table " + d + "/table.csv --out-spec " + d +
            "/spec.json",
        cli_s + " fit --val " + d + "/val.csv --spec " + d + "/spec.json" +
            " --m 500 --bins 15 --k-max 100 --seed 103 --out-model " + d +
            "/model.json",
        cli_s + " apply --model " + d + "/model.json --in " + d +
            "/test.csv --out " + d + "/pred.csv",
    };
    for (const std::string& command : commands) {
      const int rc = std::system((command + " > /dev/null 2>&1").c_str());
      if (rc != 0) return false;
    }
    return true;
  };

  if (!run_pipeline("a") || !run_pipeline("b"))
    return {false, "pipeline run failed"};

  const char* files[] = {"val.csv", "test.csv", "table.csv",
                         "spec.json", "model.json", "pred.csv"};
  for (const char* name : files) {
    const std::string a = read_bytes(base / "a" / name);
    const std::string b = read_bytes(base / "b" / name);
    if (a.empty() || a != b)
      return {false, std::string("byte mismatch in ") + name};
  }
  std::filesystem::remove_all(base);
  return {true, "synth/select/fit/apply outputs byte-identical across reruns"};
}

// --------------------------------------------------------------------------
// 8. Learning-time scale check at N=25000, C=1000, M=1000
// --------------------------------------------------------------------------
Outcome criterion_learning_time() {
  const hoki::LabeledLogits val = hoki::generate({25000, 1000, 0.5, 3.0, 9001});

  const std::uint64_t builds_before = hoki::switch_matrix_build_count();
  const auto start = clock_type::now();
  const hoki::TransformSet ts = hoki::sample_transforms(
      hoki::NoiseSpec::gaussian(0.0, 2.0), 1000, 1000, 9002);
  const auto [model, diag] = hoki::fit(val, ts, hoki::BinPartition{15}, 100,
                                       hoki::InitMode::kValidationAccuracy);
  const double elapsed = seconds_since(start);
  const std::uint64_t builds = hoki::switch_matrix_build_count() - builds_before;

  std::ostringstream detail;
  detail << "design time " << elapsed << " s on "
         << std::thread::hardware_concurrency()
         << " hardware threads, switch matrix built " << builds
         << "x, K* = " << diag.iterations;
  return {elapsed <= 120.0 && builds == 1, detail.str()};
}

// --------------------------------------------------------------------------
// 10. Grid counts
// --------------------------------------------------------------------------
Outcome criterion_grid_counts() {
  const std::vector<hoki::NoiseSpec> grid = hoki::enumerate_grid(hoki::GridConfig{});
  std::size_t gaussian = 0, uniform = 0;
  for (const hoki::NoiseSpec& spec : grid)
    (spec.family == hoki::NoiseSpec::Family::kGaussian ? gaussian : uniform)++;
  std::ostringstream detail;
  detail << gaussian << " gaussian + " << uniform << " uniform candidates";
  return {gaussian == 820 && uniform == 820, detail.str()};
}

void report(int id, const char* name, const Outcome& outcome, int& failures) {
  std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << id
            << ": " << name << " (" << outcome.detail << ")\n";
  std::cout.flush();
  if (!outcome.pass) ++failures;
}

}  // namespace

int main() {
  int failures = 0;

  report(1, "ECE matches the brute-force oracle", criterion_ece_oracle(), failures);

  const FixedPointResults fixed_point = criterion_fixed_point_and_replay();
  report(2, "fixed-point residuals vanish on converged fits", fixed_point.residuals,
         failures);
  report(3, "batch predict replays the fit confidences", fixed_point.replay,
         failures);

  const ImprovementResults improvement = criterion_improvement_and_granularity();
  report(4, "hoki improves the test ECE on overconfident data",
         improvement.improvement, failures);

  report(5, "temperature fit recovers the generating scale",
         criterion_temperature_recovery(), failures);
  report(6, "calibration-error bound arithmetic and monotonicity",
         criterion_bound_arithmetic(), failures);
  report(7, "end-to-end pipeline determinism", criterion_determinism(), failures);
  report(8, "design-time fit at N=25000, C=1000, M=1000 within budget",
         criterion_learning_time(), failures);
  report(9, "every gamma is an exact multiple of 1/M", improvement.granularity,
         failures);
  report(10, "default grid enumerates 820 + 820 candidates",
         criterion_grid_counts(), failures);

  if (failures > 0)
    std::cout << failures << " criterion(s) failed\n";
  else
    std::cout << "all criteria passed\n";
  return failures == 0 ? 0 : 1;
}
