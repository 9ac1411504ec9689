#include "hoki/transform.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>

#include "hoki/error.hpp"
#include "hoki/rng.hpp"

namespace hoki {

namespace {

std::atomic<std::uint64_t> g_switch_matrix_builds{0};

// Tile width of the float pass; 128 floats keeps the accumulator in
// registers/L1 while giving the vectorizer a long unit-stride loop.
constexpr std::size_t kTile = 128;

void check_finite(const double* values, std::size_t count, const char* what) {
  for (std::size_t i = 0; i < count; ++i)
    if (!std::isfinite(values[i])) throw InvalidInput(std::string("non-finite ") + what);
}

// First-index argmax with strict comparison; mirrors argmax_label but
// assumes finiteness was checked up front.
inline int argmax_raw(const double* row, std::size_t c) {
  int best = 0;
  double best_value = row[0];
  for (std::size_t j = 1; j < c; ++j) {
    if (row[j] > best_value) {
      best_value = row[j];
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Runs fn(begin, end) over a contiguous partition of [0, n), one chunk per
// thread. Rows are independent, so the output does not depend on the split.
template <typename Fn>
void parallel_rows(std::size_t n, Fn&& fn) {
  std::size_t threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  threads = std::min<std::size_t>({threads, n, 64});
  if (threads <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

NoiseSpec NoiseSpec::uniform(double a, double b) {
  NoiseSpec spec;
  spec.family = Family::kUniform;
  spec.a = a;
  spec.b = b;
  return spec;
}

NoiseSpec NoiseSpec::gaussian(double mu, double sigma) {
  NoiseSpec spec;
  spec.family = Family::kGaussian;
  spec.mu = mu;
  spec.sigma = sigma;
  return spec;
}

void validate(const NoiseSpec& spec) {
  switch (spec.family) {
    case NoiseSpec::Family::kUniform:
      if (!std::isfinite(spec.a) || !std::isfinite(spec.b))
        throw InvalidInput("uniform noise bounds must be finite");
      if (!(spec.a < spec.b))
        throw InvalidInput("uniform noise requires a < b");
      return;
    case NoiseSpec::Family::kGaussian:
      if (!std::isfinite(spec.mu) || !std::isfinite(spec.sigma))
        throw InvalidInput("gaussian noise parameters must be finite");
      if (!(spec.sigma > 0.0))
        throw InvalidInput("gaussian noise requires sigma > 0");
      return;
  }
  throw InvalidInput("unknown noise family");
}

TransformSet sample_transforms(const NoiseSpec& spec, std::size_t m,
                               std::size_t c, std::uint64_t seed) {
  validate(spec);
  if (m < 1) throw InvalidInput("transformation count must be >= 1");
  if (c < 2) throw InvalidInput("class count must be >= 2");

  TransformSet ts;
  ts.spec = spec;
  ts.seed = seed;
  ts.m = m;
  ts.c = c;
  ts.noise.resize(m * c);

  SplitMix64 rng(seed);
  if (spec.family == NoiseSpec::Family::kUniform) {
    for (double& v : ts.noise) v = rng.uniform(spec.a, spec.b);
  } else {
    for (double& v : ts.noise) v = rng.gaussian(spec.mu, spec.sigma);
  }
  return ts;
}

std::vector<double> apply(std::span<const double> noise_vec,
                          std::span<const double> row) {
  if (noise_vec.size() != row.size())
    throw InvalidInput("noise/logit length mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] + noise_vec[j];
  return out;
}

SwitchMatrix::SwitchMatrix(std::size_t n, std::size_t m)
    : examples(n), transforms(m) {
  bits.assign(n * ((m + 63) / 64), 0);
  preserve_counts.assign(n, 0);
}

void SwitchMatrix::refresh_counts() {
  const std::size_t words = words_per_row();
  for (std::size_t i = 0; i < examples; ++i) {
    std::uint64_t count = 0;
    for (std::size_t w = 0; w < words; ++w)
      count += std::popcount(bits[i * words + w]);
    preserve_counts[i] = static_cast<std::uint32_t>(count);
  }
}

SwitchMatrix switch_matrix(const LabeledLogits& data, const TransformSet& ts) {
  if (ts.c != data.c)
    throw InvalidInput("transform class count does not match dataset");
  if (data.n < 1 || ts.m < 1) throw InvalidInput("empty dataset or transform set");
  check_finite(data.logits.data(), data.logits.size(), "logit");
  check_finite(ts.noise.data(), ts.noise.size(), "noise value");

  g_switch_matrix_builds.fetch_add(1, std::memory_order_relaxed);

  const std::size_t n = data.n, m = ts.m, c = data.c;
  const std::size_t m_pad = (m + kTile - 1) / kTile * kTile;

  // Transposed float copy of the noise (class-major) plus per-class extrema.
  // The float pass only classifies pairs whose decision margin clears a
  // conservative rounding band; everything inside the band is re-evaluated
  // with the exact double argmax, so the result matches the double path
  // bit-for-bit.
  std::vector<float> noise_t(c * m_pad, 0.0f);
  std::vector<double> col_max(c, -std::numeric_limits<double>::infinity());
  std::vector<double> col_min(c, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = ts.noise.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) {
      noise_t[j * m_pad + i] = static_cast<float>(row[j]);
      col_max[j] = std::max(col_max[j], row[j]);
      col_min[j] = std::min(col_min[j], row[j]);
    }
  }
  double noise_abs = 0.0;
  for (std::size_t j = 0; j < c; ++j)
    noise_abs = std::max({noise_abs, std::fabs(col_max[j]), std::fabs(col_min[j])});
  const float eps = static_cast<float>(1e-6 * (1.0 + 8.0 * noise_abs));

  SwitchMatrix sm(n, m);
  const std::size_t words = sm.words_per_row();

  parallel_rows(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> contenders;
    std::vector<float> margin_f(c);
    contenders.reserve(c);

    for (std::size_t i = begin; i < end; ++i) {
      const double* x = data.logits.data() + i * c;
      const int y = argmax_raw(x, c);
      const double xy = x[static_cast<std::size_t>(y)];
      std::uint64_t* row_bits = sm.bits.data() + i * words;

      // A class can only take over the argmax, for at least one sampled
      // transformation, if the largest noise it ever receives minus the
      // smallest noise the predicted class ever receives covers its margin.
      contenders.clear();
      const double min_y = col_min[static_cast<std::size_t>(y)];
      for (std::size_t j = 0; j < c; ++j) {
        if (static_cast<int>(j) == y) continue;
        const double margin = xy - x[j];
        if (col_max[j] - min_y >= margin) {
          contenders.push_back(j);
          margin_f[j] = static_cast<float>(margin);
        }
      }

      if (contenders.empty()) {
        for (std::size_t w = 0; w < words; ++w) {
          const std::size_t remaining = m - w * 64;
          row_bits[w] = remaining >= 64 ? ~std::uint64_t{0}
                                        : (std::uint64_t{1} << remaining) - 1;
        }
        sm.preserve_counts[i] = static_cast<std::uint32_t>(m);
        continue;
      }

      std::uint32_t preserved_count = 0;
      const float* ty = noise_t.data() + static_cast<std::size_t>(y) * m_pad;
      for (std::size_t m0 = 0; m0 < m; m0 += kTile) {
        float acc[kTile];
        for (std::size_t k = 0; k < kTile; ++k)
          acc[k] = -std::numeric_limits<float>::max();
        for (const std::size_t j : contenders) {
          const float* tj = noise_t.data() + j * m_pad + m0;
          const float dj = margin_f[j];
          for (std::size_t k = 0; k < kTile; ++k)
            acc[k] = std::max(acc[k], tj[k] - dj);
        }
        const std::size_t valid = std::min(kTile, m - m0);
        for (std::size_t k = 0; k < valid; ++k) {
          const float diff = acc[k] - ty[m0 + k];
          bool keep;
          if (diff < -eps) {
            keep = true;
          } else if (diff > eps) {
            keep = false;
          } else {
            // Band too narrow for float32: exact double re-evaluation.
            const double* t_row = ts.noise.data() + (m0 + k) * c;
            int best = 0;
            double best_value = x[0] + t_row[0];
            for (std::size_t j = 1; j < c; ++j) {
              const double v = x[j] + t_row[j];
              if (v > best_value) {
                best_value = v;
                best = static_cast<int>(j);
              }
            }
            keep = best == y;
          }
          if (keep) {
            row_bits[(m0 + k) / 64] |= std::uint64_t{1} << ((m0 + k) % 64);
            ++preserved_count;
          }
        }
      }
      sm.preserve_counts[i] = preserved_count;
    }
  });

  return sm;
}

std::vector<double> gamma(const SwitchMatrix& sm) {
  if (sm.transforms < 1) throw InvalidInput("gamma of empty switch matrix");
  std::vector<double> out(sm.examples);
  for (std::size_t i = 0; i < sm.examples; ++i)
    out[i] = static_cast<double>(sm.preserve_counts[i]) /
             static_cast<double>(sm.transforms);
  return out;
}

std::uint64_t switch_matrix_build_count() {
  return g_switch_matrix_builds.load(std::memory_order_relaxed);
}

}  // namespace hoki
