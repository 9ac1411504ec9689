#include "hoki/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hoki/error.hpp"
#include "hoki/format.hpp"
#include "hoki/rng.hpp"

namespace hoki {

namespace {

constexpr char kDatasetMagic[8] = {'H', 'O', 'K', 'I', 'B', 'I', 'N', '1'};
constexpr int kFormatVersion = 1;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw ParseError(path, 0, "write failed");
}

double parse_double(const std::string& path, std::size_t line,
                    std::string_view field) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(path, line, "malformed number '" + std::string(field) + "'");
  if (!std::isfinite(value))
    throw ParseError(path, line, "non-finite logit '" + std::string(field) + "'");
  return value;
}

long long parse_int(const std::string& path, std::size_t line,
                    std::string_view field) {
  long long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError(path, line, "malformed integer '" + std::string(field) + "'");
  return value;
}

LabeledLogits load_dataset_csv(const std::string& path, const std::string& text) {
  LabeledLogits data;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> fields;

  auto next_line = [&](std::string_view& out) {
    if (pos >= text.size()) return false;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    out = std::string_view(text).substr(pos, nl - pos);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  auto split = [&](std::string_view line) {
    fields.clear();
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
  };

  std::string_view line;
  if (!next_line(line)) throw ParseError(path, 1, "missing header");
  split(line);
  if (fields.size() < 2 || fields[0] != "label")
    throw ParseError(path, 1, "header must be label,logit_0,...");
  const std::size_t c = fields.size() - 1;
  for (std::size_t j = 0; j < c; ++j) {
    const std::string expected = "logit_" + std::to_string(j);
    if (fields[j + 1] != expected)
      throw ParseError(path, 1, "expected header column '" + expected + "'");
  }

  data.c = c;
  while (next_line(line)) {
    if (line.empty() && pos >= text.size()) break;  // trailing newline
    split(line);
    if (fields.size() != c + 1)
      throw ParseError(path, line_no,
                       "expected " + std::to_string(c + 1) + " columns, got " +
                           std::to_string(fields.size()));
    const long long label = parse_int(path, line_no, fields[0]);
    if (label < 0 || static_cast<std::size_t>(label) >= c)
      throw ParseError(path, line_no,
                       "label " + std::to_string(label) + " out of range [0, " +
                           std::to_string(c) + ")");
    data.labels.push_back(static_cast<int>(label));
    for (std::size_t j = 0; j < c; ++j)
      data.logits.push_back(parse_double(path, line_no, fields[j + 1]));
  }
  data.n = data.labels.size();
  if (data.n == 0) throw ParseError(path, line_no, "dataset has no examples");
  validate(data);
  return data;
}

LabeledLogits load_dataset_binary(const std::string& path, const std::string& text) {
  const std::size_t header = sizeof(kDatasetMagic) + 2 * sizeof(std::uint64_t);
  if (text.size() < header) throw ParseError(path, 0, "truncated binary header");
  std::uint64_t n = 0, c = 0;
  std::memcpy(&n, text.data() + 8, 8);
  std::memcpy(&c, text.data() + 16, 8);
  if (n < 1 || c < 2 || n >= (1ull << 31) || c >= (1ull << 22) ||
      n * c >= (1ull << 31))
    throw ParseError(path, 0, "implausible binary dimensions");
  const std::size_t expected =
      header + n * c * sizeof(double) + n * sizeof(std::int64_t);
  if (text.size() != expected)
    throw ParseError(path, 0, "binary payload size mismatch");

  LabeledLogits data;
  data.n = n;
  data.c = c;
  data.logits.resize(n * c);
  std::memcpy(data.logits.data(), text.data() + header, n * c * sizeof(double));
  data.labels.resize(n);
  const char* label_base = text.data() + header + n * c * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    std::int64_t label = 0;
    std::memcpy(&label, label_base + i * sizeof(std::int64_t), 8);
    if (label < 0 || static_cast<std::uint64_t>(label) >= c)
      throw ParseError(path, 0, "label out of range at example " + std::to_string(i));
    data.labels[i] = static_cast<int>(label);
  }
  validate(data);
  return data;
}

const char* init_mode_name(InitMode mode) {
  return mode == InitMode::kValidationAccuracy ? "validation-accuracy"
                                               : "uncalibrated-confidence";
}

InitMode init_mode_from(const std::string& path, const std::string& name) {
  if (name == "validation-accuracy") return InitMode::kValidationAccuracy;
  if (name == "uncalibrated-confidence") return InitMode::kUncalibratedConfidence;
  throw ParseError(path, 0, "unknown init_mode '" + name + "'");
}

void append_noise_spec(std::string& out, const NoiseSpec& spec) {
  if (spec.family == NoiseSpec::Family::kUniform) {
    out += "{\"family\":\"uniform\",\"a\":";
    out += format_double(spec.a);
    out += ",\"b\":";
    out += format_double(spec.b);
    out += "}";
  } else {
    out += "{\"family\":\"gaussian\",\"mu\":";
    out += format_double(spec.mu);
    out += ",\"sigma\":";
    out += format_double(spec.sigma);
    out += "}";
  }
}

using json = nlohmann::json;

double json_number(const std::string& path, const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ParseError(path, 0, std::string("missing or non-numeric field '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v))
    throw ParseError(path, 0, std::string("non-finite field '") + key + "'");
  return v;
}

std::uint64_t json_uint(const std::string& path, const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw ParseError(path, 0,
                     std::string("missing or non-integer field '") + key + "'");
  return j.at(key).get<std::uint64_t>();
}

NoiseSpec noise_spec_from(const std::string& path, const json& j) {
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
    throw ParseError(path, 0, "malformed noise_spec");
  const std::string family = j.at("family").get<std::string>();
  NoiseSpec spec;
  if (family == "uniform") {
    spec = NoiseSpec::uniform(json_number(path, j, "a"), json_number(path, j, "b"));
  } else if (family == "gaussian") {
    spec = NoiseSpec::gaussian(json_number(path, j, "mu"),
                               json_number(path, j, "sigma"));
  } else {
    throw ParseError(path, 0, "unknown noise family '" + family + "'");
  }
  try {
    validate(spec);
  } catch (const InvalidInput& e) {
    throw ParseError(path, 0, e.what());
  }
  return spec;
}

}  // namespace

LabeledLogits load_dataset(const std::string& path) {
  const std::string text = read_file(path);
  if (text.size() >= sizeof(kDatasetMagic) &&
      std::memcmp(text.data(), kDatasetMagic, sizeof(kDatasetMagic)) == 0)
    return load_dataset_binary(path, text);
  return load_dataset_csv(path, text);
}

void save_dataset_csv(const LabeledLogits& data, const std::string& path) {
  validate(data);
  std::string out;
  out.reserve(data.n * (data.c + 1) * 12);
  out += "label";
  for (std::size_t j = 0; j < data.c; ++j) {
    out += ",logit_";
    out += std::to_string(j);
  }
  out += '\n';
  for (std::size_t i = 0; i < data.n; ++i) {
    out += std::to_string(data.labels[i]);
    const double* row = data.logits.data() + i * data.c;
    for (std::size_t j = 0; j < data.c; ++j) {
      out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_file(path, out);
}

void save_dataset_binary(const LabeledLogits& data, const std::string& path) {
  validate(data);
  std::string out;
  const std::uint64_t n = data.n, c = data.c;
  out.reserve(24 + n * c * 8 + n * 8);
  out.append(kDatasetMagic, sizeof(kDatasetMagic));
  out.append(reinterpret_cast<const char*>(&n), 8);
  out.append(reinterpret_cast<const char*>(&c), 8);
  out.append(reinterpret_cast<const char*>(data.logits.data()), n * c * 8);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t label = data.labels[i];
    out.append(reinterpret_cast<const char*>(&label), 8);
  }
  write_file(path, out);
}

std::string model_to_json(const CalibrationModel& model) {
  const TransformSet& ts = model.transforms;
  std::string out;
  out.reserve(64 + ts.m * ts.c * 12 + model.iterations * model.bins * 24);
  out += "{\n";
  out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
  out += "  \"model_type\": \"hoki\",\n";
  out += "  \"J\": " + format_u64(model.bins) + ",\n";
  out += "  \"M\": " + format_u64(ts.m) + ",\n";
  out += "  \"C\": " + format_u64(ts.c) + ",\n";
  out += "  \"K_star\": " + format_u64(model.iterations) + ",\n";
  out += "  \"p_hat\": " + format_double(model.p_hat) + ",\n";
  out += std::string("  \"init_mode\": \"") + init_mode_name(model.init_mode) +
         "\",\n";
  out += std::string("  \"rng\": {\"algorithm\": \"") + kRngAlgorithm +
         "\", \"seed\": " + format_u64(ts.seed) + "},\n";
  out += "  \"noise_spec\": ";
  append_noise_spec(out, ts.spec);
  out += ",\n";

  out += "  \"transforms\": [\n";
  for (std::size_t i = 0; i < ts.m; ++i) {
    out += "    [";
    const double* row = ts.noise.data() + i * ts.c;
    for (std::size_t j = 0; j < ts.c; ++j) {
      if (j > 0) out += ',';
      out += format_double(row[j]);
    }
    out += i + 1 < ts.m ? "],\n" : "]\n";
  }
  out += "  ],\n";

  out += "  \"params\": [\n";
  for (std::size_t k = 0; k < model.iterations; ++k) {
    out += "    [";
    for (std::size_t j = 0; j < model.bins; ++j) {
      if (j > 0) out += ',';
      out += '[';
      out += format_double(model.alpha_at(k, j));
      out += ',';
      out += format_double(model.beta_at(k, j));
      out += ']';
    }
    out += k + 1 < model.iterations ? "],\n" : "]\n";
  }
  out += "  ]\n";
  out += "}\n";
  return out;
}

std::string model_to_json(const TemperatureModel& model) {
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(kFormatVersion) + ",\n";
  out += "  \"model_type\": \"temperature\",\n";
  out += "  \"T\": " + format_double(model.t) + "\n";
  out += "}\n";
  return out;
}

void save_model(const CalibrationModel& model, const std::string& path) {
  write_file(path, model_to_json(model));
}

void save_model(const TemperatureModel& model, const std::string& path) {
  write_file(path, model_to_json(model));
}

NoiseSpec load_noise_spec(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  return noise_spec_from(path, j);
}

AnyModel load_model(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(path, 0, "model file is not a JSON object");

  if (!j.contains("format_version") || !j.at("format_version").is_number_integer())
    throw ParseError(path, 0, "missing format_version");
  const auto version = j.at("format_version").get<std::int64_t>();
  if (version != kFormatVersion)
    throw VersionError(path + ": unsupported format_version " +
                       std::to_string(version));

  if (!j.contains("model_type") || !j.at("model_type").is_string())
    throw ParseError(path, 0, "missing model_type");
  const std::string type = j.at("model_type").get<std::string>();

  if (type == "temperature") {
    TemperatureModel model{json_number(path, j, "T")};
    if (!(model.t > 0.0)) throw ParseError(path, 0, "temperature must be > 0");
    return model;
  }
  if (type != "hoki")
    throw ParseError(path, 0, "unknown model_type '" + type + "'");

  CalibrationModel model;
  model.bins = json_uint(path, j, "J");
  const std::uint64_t m = json_uint(path, j, "M");
  const std::uint64_t c = json_uint(path, j, "C");
  model.iterations = json_uint(path, j, "K_star");
  model.p_hat = json_number(path, j, "p_hat");
  if (model.bins < 1 || m < 1 || c < 2 || model.iterations < 1)
    throw ParseError(path, 0, "implausible model dimensions");
  if (!(model.p_hat >= 0.0 && model.p_hat <= 1.0))
    throw ParseError(path, 0, "p_hat outside [0, 1]");

  if (!j.contains("init_mode") || !j.at("init_mode").is_string())
    throw ParseError(path, 0, "missing init_mode");
  model.init_mode = init_mode_from(path, j.at("init_mode").get<std::string>());

  if (!j.contains("rng") || !j.at("rng").is_object())
    throw ParseError(path, 0, "missing rng descriptor");
  const json& rng = j.at("rng");
  if (!rng.contains("algorithm") || !rng.at("algorithm").is_string() ||
      rng.at("algorithm").get<std::string>() != kRngAlgorithm)
    throw ParseError(path, 0, "unsupported rng algorithm");
  const std::uint64_t seed = json_uint(path, rng, "seed");

  if (!j.contains("noise_spec"))
    throw ParseError(path, 0, "missing noise_spec");
  TransformSet ts;
  ts.spec = noise_spec_from(path, j.at("noise_spec"));
  ts.seed = seed;
  ts.m = m;
  ts.c = c;

  if (!j.contains("transforms") || !j.at("transforms").is_array() ||
      j.at("transforms").size() != m)
    throw ParseError(path, 0, "transforms must be an M-row array");
  ts.noise.reserve(m * c);
  for (const json& row : j.at("transforms")) {
    if (!row.is_array() || row.size() != c)
      throw ParseError(path, 0, "transform row has wrong length");
    for (const json& v : row) {
      if (!v.is_number()) throw ParseError(path, 0, "non-numeric noise value");
      const double value = v.get<double>();
      if (!std::isfinite(value)) throw ParseError(path, 0, "non-finite noise value");
      ts.noise.push_back(value);
    }
  }
  model.transforms = std::move(ts);

  if (!j.contains("params") || !j.at("params").is_array() ||
      j.at("params").size() != model.iterations)
    throw ParseError(path, 0, "params must be a K_star-row array");
  model.alpha.reserve(model.iterations * model.bins);
  model.beta.reserve(model.iterations * model.bins);
  for (const json& row : j.at("params")) {
    if (!row.is_array() || row.size() != model.bins)
      throw ParseError(path, 0, "params row has wrong length");
    for (const json& pair : row) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() ||
          !pair[1].is_number())
        throw ParseError(path, 0, "params entry is not an [alpha, beta] pair");
      const double alpha = pair[0].get<double>();
      const double beta = pair[1].get<double>();
      if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
        throw ParseError(path, 0, "alpha/beta outside [0, 1]");
      model.alpha.push_back(alpha);
      model.beta.push_back(beta);
    }
  }
  return model;
}

}  // namespace hoki
