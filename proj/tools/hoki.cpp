// Command-line front end. Subcommands compose through files so every stage
// of the pipeline is independently scriptable and testable:
//
//   synth -> select -> fit -> apply -> eval     (plus bound and compare)
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
// stdout carries only the machine-readable payload; diagnostics go to stderr.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hoki/baselines.hpp"
#include "hoki/bounds.hpp"
#include "hoki/calibrator.hpp"
#include "hoki/core.hpp"
#include "hoki/error.hpp"
#include "hoki/format.hpp"
#include "hoki/io.hpp"
#include "hoki/metrics.hpp"
#include "hoki/selection.hpp"
#include "hoki/synth.hpp"
#include "hoki/transform.hpp"

namespace {

// Bad flag values detected before any file is touched.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

hoki::InitMode parse_init_mode(const std::string& name) {
  if (name == "acc") return hoki::InitMode::kValidationAccuracy;
  if (name == "conf") return hoki::InitMode::kUncalibratedConfidence;
  throw UsageError("--init must be 'acc' or 'conf'");
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw hoki::ParseError(path, 0, "cannot open file for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw hoki::ParseError(path, 0, "write failed");
}

std::string predictions_csv(const std::vector<hoki::Prediction>& predictions) {
  std::string out = "label,confidence\n";
  for (const hoki::Prediction& p : predictions) {
    out += std::to_string(p.label);
    out += ',';
    out += hoki::format_double(p.confidence);
    out += '\n';
  }
  return out;
}

struct PredictionFile {
  std::vector<int> labels;
  std::vector<double> confidences;
};

PredictionFile load_predictions_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hoki::ParseError(path, 0, "cannot open file");
  PredictionFile out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "label,confidence")
        throw hoki::ParseError(path, 1, "header must be label,confidence");
      continue;
    }
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw hoki::ParseError(path, line_no, "expected 2 columns");
    long long label = 0;
    double confidence = 0.0;
    const char* lab_end = line.data() + comma;
    auto r1 = std::from_chars(line.data(), lab_end, label);
    auto r2 = std::from_chars(line.data() + comma + 1,
                              line.data() + line.size(), confidence);
    if (r1.ec != std::errc() || r1.ptr != lab_end || r2.ec != std::errc() ||
        r2.ptr != line.data() + line.size())
      throw hoki::ParseError(path, line_no, "malformed row");
    if (!(confidence >= 0.0 && confidence <= 1.0))
      throw hoki::ParseError(path, line_no, "confidence outside [0, 1]");
    out.labels.push_back(static_cast<int>(label));
    out.confidences.push_back(confidence);
  }
  if (out.labels.empty()) throw hoki::ParseError(path, 0, "no predictions");
  return out;
}

std::vector<hoki::Prediction> apply_model(const hoki::AnyModel& model,
                                          const hoki::LabeledLogits& data) {
  if (const auto* hoki_model = std::get_if<hoki::CalibrationModel>(&model)) {
    if (hoki_model->transforms.c != data.c)
      throw hoki::InvalidInput("model class count does not match dataset");
    return hoki::predict_batch(data, *hoki_model);
  }
  const auto& temp = std::get<hoki::TemperatureModel>(model);
  std::vector<hoki::Prediction> out(data.n);
  for (std::size_t i = 0; i < data.n; ++i) {
    out[i].label = hoki::argmax_label(data.row(i));
    out[i].confidence = hoki::temperature_apply(temp, data.row(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// subcommand payloads
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::size_t n = 1000;
  std::size_t classes = 10;
  double concentration = 0.5;
  double distortion = 1.0;
  std::uint64_t seed = 0;
  std::string out_val, out_test;
  bool binary = false;
};

int run_synth(const SynthArgs& args) {
  if (args.n < 1) throw UsageError("--n must be >= 1");
  if (args.classes < 2) throw UsageError("--classes must be >= 2");
  if (!(args.concentration > 0.0)) throw UsageError("--concentration must be > 0");
  if (!(args.distortion > 0.0)) throw UsageError("--distortion must be > 0");

  // One stream, 2n examples: first half validation, second half test.
  hoki::SynthConfig cfg{2 * args.n, args.classes, args.concentration,
                        args.distortion, args.seed};
  const hoki::LabeledLogits all = hoki::generate(cfg);

  hoki::LabeledLogits val, test;
  val.n = test.n = args.n;
  val.c = test.c = args.classes;
  val.logits.assign(all.logits.begin(),
                    all.logits.begin() + static_cast<std::ptrdiff_t>(args.n * args.classes));
  test.logits.assign(all.logits.begin() + static_cast<std::ptrdiff_t>(args.n * args.classes),
                     all.logits.end());
  val.labels.assign(all.labels.begin(),
                    all.labels.begin() + static_cast<std::ptrdiff_t>(args.n));
  test.labels.assign(all.labels.begin() + static_cast<std::ptrdiff_t>(args.n),
                     all.labels.end());

  if (args.binary) {
    hoki::save_dataset_binary(val, args.out_val);
    hoki::save_dataset_binary(test, args.out_test);
  } else {
    hoki::save_dataset_csv(val, args.out_val);
    hoki::save_dataset_csv(test, args.out_test);
  }
  std::cout << "{\"n\":" << args.n << ",\"classes\":" << args.classes
            << ",\"val\":\"" << args.out_val << "\",\"test\":\""
            << args.out_test << "\"}\n";
  return 0;
}

struct SelectArgs {
  std::string val_path;
  double grid_step = 1.0;
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  std::string out_table, out_spec;
};

int run_select(const SelectArgs& args) {
  if (!(args.grid_step > 0.0)) throw UsageError("--grid-step must be > 0");
  if (args.m < 1) throw UsageError("--m must be >= 1");

  const hoki::LabeledLogits val = hoki::load_dataset(args.val_path);
  hoki::GridConfig cfg;
  cfg.mu_step = cfg.sigma_step = cfg.uniform_step = args.grid_step;
  cfg.transforms = args.m;
  cfg.seed = args.seed;

  const hoki::SelectionResult result = hoki::select_transform(val, cfg);

  std::ostringstream table;
  hoki::write_candidate_table_csv(result, table);
  write_text_file(args.out_table, table.str());

  const std::string winner = hoki::noise_spec_json(result.best);
  if (!args.out_spec.empty()) write_text_file(args.out_spec, winner + "\n");

  std::cout << "{\"best\":" << winner
            << ",\"sigma_hat\":" << hoki::format_double(result.best_score.sigma_hat)
            << ",\"alpha_hat\":" << hoki::format_double(result.best_score.alpha_hat)
            << ",\"beta_hat\":" << hoki::format_double(result.best_score.beta_hat)
            << "}\n";
  return 0;
}

struct FitArgs {
  std::string val_path, spec_path;
  std::size_t m = 1000;
  std::size_t bins = 15;
  std::size_t k_max = 100;
  std::uint64_t seed = 0;
  std::string init = "acc";
  std::string out_model;
};

int run_fit(const FitArgs& args) {
  if (args.m < 1) throw UsageError("--m must be >= 1");
  if (args.bins < 1) throw UsageError("--bins must be >= 1");
  if (args.k_max < 1) throw UsageError("--k-max must be >= 1");
  const hoki::InitMode init_mode = parse_init_mode(args.init);

  const hoki::LabeledLogits val = hoki::load_dataset(args.val_path);
  const hoki::NoiseSpec spec = hoki::load_noise_spec(args.spec_path);
  const hoki::TransformSet ts =
      hoki::sample_transforms(spec, args.m, val.c, args.seed);

  const hoki::BinPartition partition{args.bins};
  auto [model, diag] = hoki::fit(val, ts, partition, args.k_max, init_mode);
  hoki::save_model(model, args.out_model);

  const std::vector<int> predicted = hoki::predicted_labels(val);
  const std::vector<std::uint8_t> correct = hoki::correctness(val, predicted);
  const double val_ece = hoki::ece(diag.final_confidences, correct, partition);

  std::cout << "{\"converged\":" << (diag.converged ? "true" : "false")
            << ",\"iterations\":" << diag.iterations
            << ",\"p_hat\":" << hoki::format_double(model.p_hat)
            << ",\"val_ece\":" << hoki::format_double(val_ece);
  if (!diag.converged)
    std::cout << ",\"warning\":\"partition did not converge within k-max\"";
  std::cout << "}\n";
  return 0;
}

struct ApplyArgs {
  std::string model_path, in_path, out_path;
};

int run_apply(const ApplyArgs& args) {
  const hoki::AnyModel model = hoki::load_model(args.model_path);
  const hoki::LabeledLogits data = hoki::load_dataset(args.in_path);
  const std::string csv = predictions_csv(apply_model(model, data));
  if (args.out_path.empty())
    std::cout << csv;
  else
    write_text_file(args.out_path, csv);
  return 0;
}

struct EvalArgs {
  std::string in_path, model_path, confidences_path, out_bins;
  std::size_t bins = 15;
};

int run_eval(const EvalArgs& args) {
  if (args.bins < 1) throw UsageError("--bins must be >= 1");
  if (!args.model_path.empty() && !args.confidences_path.empty())
    throw UsageError("--model and --confidences are mutually exclusive");

  const hoki::LabeledLogits data = hoki::load_dataset(args.in_path);

  std::vector<double> confidences;
  std::vector<std::uint8_t> correct(data.n);
  if (!args.confidences_path.empty()) {
    const PredictionFile pred = load_predictions_csv(args.confidences_path);
    if (pred.labels.size() != data.n)
      throw hoki::ParseError(args.confidences_path, 0,
                             "prediction count does not match dataset");
    confidences = pred.confidences;
    for (std::size_t i = 0; i < data.n; ++i)
      correct[i] = pred.labels[i] == data.labels[i] ? 1 : 0;
  } else if (!args.model_path.empty()) {
    const hoki::AnyModel model = hoki::load_model(args.model_path);
    const std::vector<hoki::Prediction> predictions = apply_model(model, data);
    confidences.resize(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
      confidences[i] = predictions[i].confidence;
      correct[i] = predictions[i].label == data.labels[i] ? 1 : 0;
    }
  } else {
    confidences = hoki::uncalibrated_confidences(data);
    const std::vector<int> predicted = hoki::predicted_labels(data);
    for (std::size_t i = 0; i < data.n; ++i)
      correct[i] = predicted[i] == data.labels[i] ? 1 : 0;
  }

  const hoki::BinPartition partition{args.bins};
  const hoki::BinReport report = hoki::bin_report(confidences, correct, partition);
  if (!args.out_bins.empty()) {
    std::ostringstream csv;
    hoki::write_bin_report_csv(report, csv);
    write_text_file(args.out_bins, csv.str());
  }

  std::uint64_t correct_total = 0;
  for (const std::uint8_t c : correct) correct_total += c;
  const double accuracy =
      static_cast<double>(correct_total) / static_cast<double>(data.n);

  std::cout << "{\"ece\":" << hoki::format_double(hoki::ece(report))
            << ",\"accuracy\":" << hoki::format_double(accuracy)
            << ",\"confidence_stddev\":"
            << hoki::format_double(hoki::confidence_stddev(confidences))
            << ",\"n\":" << data.n << "}\n";
  return 0;
}

struct BoundArgs {
  double ece = 0.0;
  std::size_t bins = 15;
  std::uint64_t n = 1;
  double delta = 0.05;
};

int run_bound(const BoundArgs& args) {
  if (!(args.ece >= 0.0 && args.ece <= 1.0))
    throw UsageError("--ece must be in [0, 1]");
  if (args.bins < 1) throw UsageError("--bins must be >= 1");
  if (args.n < 1) throw UsageError("--n must be >= 1");
  if (!(args.delta > 0.0 && args.delta <= 1.0))
    throw UsageError("--delta must be in (0, 1]");

  const double eps = hoki::ce_bound({args.ece, args.bins, args.n, args.delta});
  std::printf("%.9f\n", eps);
  return 0;
}

struct CompareArgs {
  std::string val_path, test_path, spec_path;
  std::size_t m = 1000;
  std::size_t bins = 15;
  std::uint64_t seed = 0;
};

int run_compare(const CompareArgs& args) {
  if (args.m < 1) throw UsageError("--m must be >= 1");
  if (args.bins < 1) throw UsageError("--bins must be >= 1");

  const hoki::LabeledLogits val = hoki::load_dataset(args.val_path);
  const hoki::LabeledLogits test = hoki::load_dataset(args.test_path);
  const hoki::NoiseSpec spec = hoki::load_noise_spec(args.spec_path);
  const hoki::BinPartition partition{args.bins};

  const std::vector<int> test_predicted = hoki::predicted_labels(test);
  const std::vector<std::uint8_t> test_correct =
      hoki::correctness(test, test_predicted);

  using clock = std::chrono::steady_clock;
  auto seconds_since = [](clock::time_point start) {
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  const double uncal_ece =
      hoki::ece(hoki::uncalibrated_confidences(test), test_correct, partition);

  const auto temp_start = clock::now();
  const hoki::TemperatureModel temp = hoki::temperature_fit(val);
  const double temp_seconds = seconds_since(temp_start);
  std::vector<double> temp_conf(test.n);
  for (std::size_t i = 0; i < test.n; ++i)
    temp_conf[i] = hoki::temperature_apply(temp, test.row(i));
  const double temp_ece = hoki::ece(temp_conf, test_correct, partition);

  // Design time covers transformation sampling plus the iterative fit.
  const auto hoki_start = clock::now();
  const hoki::TransformSet ts =
      hoki::sample_transforms(spec, args.m, val.c, args.seed);
  auto [model, diag] =
      hoki::fit(val, ts, partition, 100, hoki::InitMode::kValidationAccuracy);
  const double hoki_seconds = seconds_since(hoki_start);

  const std::vector<hoki::Prediction> predictions =
      hoki::predict_batch(test, model);
  std::vector<double> hoki_conf(test.n);
  for (std::size_t i = 0; i < test.n; ++i) hoki_conf[i] = predictions[i].confidence;
  const double hoki_ece = hoki::ece(hoki_conf, test_correct, partition);

  char line[128];
  std::cout << "method,test_ece,fit_seconds\n";
  std::snprintf(line, sizeof(line), "uncalibrated,%s,0\n",
                hoki::format_double(uncal_ece).c_str());
  std::cout << line;
  std::snprintf(line, sizeof(line), "temperature,%s,%.6f\n",
                hoki::format_double(temp_ece).c_str(), temp_seconds);
  std::cout << line;
  std::snprintf(line, sizeof(line), "hoki,%s,%.6f\n",
                hoki::format_double(hoki_ece).c_str(), hoki_seconds);
  std::cout << line;
  if (!diag.converged)
    std::cerr << "warning: hoki fit did not converge within k-max\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hoki - post-hoc confidence calibration from logit-noise transformations"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic miscalibrated dataset (validation + test split)");
  synth->add_option("--n", synth_args.n, "Examples per split")->required();
  synth->add_option("--classes", synth_args.classes, "Class count")->required();
  synth->add_option("--concentration", synth_args.concentration,
                    "Dirichlet concentration (default 0.5)");
  synth->add_option("--distortion", synth_args.distortion,
                    "Logit distortion factor; 1 = calibrated, >1 = overconfident");
  synth->add_option("--seed", synth_args.seed, "RNG seed");
  synth->add_option("--out-val", synth_args.out_val, "Validation output path")->required();
  synth->add_option("--out-test", synth_args.out_test, "Test output path")->required();
  synth->add_flag("--binary", synth_args.binary, "Write the packed binary format");

  SelectArgs select_args;
  CLI::App* select = app.add_subcommand(
      "select", "Grid-search noise parameters maximizing the confidence spread");
  select->add_option("--val", select_args.val_path, "Validation dataset")->required();
  select->add_option("--grid-step", select_args.grid_step, "Grid step (default 1)");
  select->add_option("--m", select_args.m, "Transformations per candidate");
  select->add_option("--seed", select_args.seed, "Base RNG seed");
  select->add_option("--out-table", select_args.out_table, "Candidate table CSV path")
      ->required();
  select->add_option("--out-spec", select_args.out_spec, "Winning NoiseSpec JSON path");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit the iterative calibrator");
  fit->add_option("--val", fit_args.val_path, "Validation dataset")->required();
  fit->add_option("--spec", fit_args.spec_path, "NoiseSpec JSON path")->required();
  fit->add_option("--m", fit_args.m, "Transformation count (default 1000)");
  fit->add_option("--bins", fit_args.bins, "Confidence bins (default 15)");
  fit->add_option("--k-max", fit_args.k_max, "Maximum iterations (default 100)");
  fit->add_option("--seed", fit_args.seed, "RNG seed");
  fit->add_option("--init", fit_args.init,
                  "Initialization: acc (validation accuracy) or conf (uncalibrated)");
  fit->add_option("--out-model", fit_args.out_model, "Model output path")->required();

  ApplyArgs apply_args;
  CLI::App* apply = app.add_subcommand("apply", "Calibrate a dataset with a fitted model");
  apply->add_option("--model", apply_args.model_path, "Model JSON path")->required();
  apply->add_option("--in", apply_args.in_path, "Input dataset")->required();
  apply->add_option("--out", apply_args.out_path, "Output CSV path (stdout if omitted)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate calibration (ECE, reliability bins)");
  eval->add_option("--in", eval_args.in_path, "Dataset with ground-truth labels")->required();
  eval->add_option("--model", eval_args.model_path, "Model to apply before scoring");
  eval->add_option("--confidences", eval_args.confidences_path,
                   "Predictions CSV from apply (label,confidence)");
  eval->add_option("--bins", eval_args.bins, "Confidence bins (default 15)");
  eval->add_option("--out-bins", eval_args.out_bins, "Per-bin reliability CSV path");

  BoundArgs bound_args;
  CLI::App* bound = app.add_subcommand(
      "bound", "High-probability upper bound on the true calibration error");
  bound->add_option("--ece", bound_args.ece, "Observed test ECE")->required();
  bound->add_option("--bins", bound_args.bins, "Bin count J")->required();
  bound->add_option("--n", bound_args.n, "Test-set size")->required();
  bound->add_option("--delta", bound_args.delta, "Failure probability")->required();

  CompareArgs compare_args;
  CLI::App* compare = app.add_subcommand(
      "compare", "Uncalibrated vs temperature vs hoki on a validation/test pair");
  compare->add_option("--val", compare_args.val_path, "Validation dataset")->required();
  compare->add_option("--test", compare_args.test_path, "Test dataset")->required();
  compare->add_option("--spec", compare_args.spec_path, "NoiseSpec JSON path")->required();
  compare->add_option("--m", compare_args.m, "Transformation count");
  compare->add_option("--bins", compare_args.bins, "Confidence bins");
  compare->add_option("--seed", compare_args.seed, "RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  }

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (select->parsed()) return run_select(select_args);
    if (fit->parsed()) return run_fit(fit_args);
    if (apply->parsed()) return run_apply(apply_args);
    if (eval->parsed()) return run_eval(eval_args);
    if (bound->parsed()) return run_bound(bound_args);
    if (compare->parsed()) return run_compare(compare_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const hoki::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hoki::VersionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const hoki::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const hoki::InvalidInput& e) {
    // Inputs were flag-validated, so by now this reflects file contents.
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
