#include "infodyn/significance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>

#include "infodyn/errors.hpp"
#include "infodyn/fft.hpp"
#include "infodyn/parallel.hpp"
#include "infodyn/rng.hpp"

namespace infodyn {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

// Rearranges `out` so it holds the sorted values of the original series in the
// rank order of `shaped`: the smallest original value goes where `shaped` is
// smallest, and so on. Stable sort keeps ties deterministic.
void rank_remap(const std::vector<double>& sorted_values,
                const Eigen::VectorXd& shaped, Eigen::VectorXd& out) {
  const auto n = static_cast<std::size_t>(shaped.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return shaped[a] < shaped[b]; });
  for (std::size_t k = 0; k < n; ++k) {
    out[order[k]] = sorted_values[k];
  }
}

// Value lists produced by one evaluation: values[e][0] is the full band of
// entity e, values[e][1 + k] is bands[k].
struct ValueGrid {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<double>> coverage;
};

ValueGrid evaluate_measure(const TimeSeriesData& data,
                           const PipelineSpec& pipeline,
                           const FrequencyGrid& grid,
                           const std::vector<BandSpec>& bands,
                           MeasureKind kind,
                           const std::vector<Multiplet>& entities) {
  const SpectralMatrix psd = estimate_psd(data, pipeline.estimator, grid);
  LogDetCache cache(psd, pipeline.blocks);
  const BandSpec full{"full", 0.0, data.fs / 2.0};

  ValueGrid out;
  out.values.resize(entities.size());
  out.coverage.resize(entities.size());
  for (std::size_t e = 0; e < entities.size(); ++e) {
    RateProfile profile;
    switch (kind) {
      case MeasureKind::kEr:
        profile = spectral_er(cache, entities[e][0]);
        break;
      case MeasureKind::kMir:
        profile = spectral_mir(cache, entities[e][0], entities[e][1]);
        break;
      default:
        profile = spectral_oir(cache, entities[e]);
        break;
    }
    auto& row = out.values[e];
    auto& cov = out.coverage[e];
    row.reserve(bands.size() + 1);
    cov.reserve(bands.size() + 1);
    const BandValue fb = integrate_band(profile, full);
    row.push_back(fb.value);
    cov.push_back(fb.coverage);
    for (const BandSpec& band : bands) {
      const BandValue bv = integrate_band(profile, band);
      row.push_back(bv.value);
      cov.push_back(bv.coverage);
    }
  }
  return out;
}

// Decision rules, applied per band. `side` selects the thresholding scheme.
enum class TestSide { kLowerOnly, kUpperOnly, kTwoSided, kZeroOutside };

BandDecision decide(const std::string& band_name, double f_low, double f_high,
                    double original, double cover,
                    std::vector<double> surrogate_values, double alpha,
                    TestSide side) {
  BandDecision d;
  d.band_name = band_name;
  d.f_low = f_low;
  d.f_high = f_high;
  d.original = original;
  d.coverage = cover;
  d.surrogate_values = std::move(surrogate_values);

  std::vector<double> sorted = d.surrogate_values;
  std::sort(sorted.begin(), sorted.end());
  d.threshold_low = kNan;
  d.threshold_high = kNan;
  switch (side) {
    case TestSide::kLowerOnly:
      d.threshold_low = percentile_threshold(sorted, alpha);
      if (original < d.threshold_low) {
        d.significant = true;
        d.crossed_side = -1;
      }
      break;
    case TestSide::kUpperOnly:
      d.threshold_high = percentile_threshold(sorted, 1.0 - alpha);
      if (original > d.threshold_high) {
        d.significant = true;
        d.crossed_side = 1;
      }
      break;
    case TestSide::kTwoSided:
      d.threshold_low = percentile_threshold(sorted, alpha / 2.0);
      d.threshold_high = percentile_threshold(sorted, 1.0 - alpha / 2.0);
      if (original < d.threshold_low) {
        d.significant = true;
        d.crossed_side = -1;
      } else if (original > d.threshold_high) {
        d.significant = true;
        d.crossed_side = 1;
      }
      break;
    case TestSide::kZeroOutside:
      // Not significant only when zero lies strictly inside the central
      // interval; crossed_side then carries the redundancy/synergy sign.
      d.threshold_low = percentile_threshold(sorted, alpha / 2.0);
      d.threshold_high = percentile_threshold(sorted, 1.0 - alpha / 2.0);
      if (!(d.threshold_low < 0.0 && 0.0 < d.threshold_high)) {
        d.significant = true;
        d.crossed_side = original > 0.0 ? 1 : -1;
      }
      break;
  }
  return d;
}

// Runs one resampling test end to end: evaluates the original, generates and
// evaluates n_surrogates replicates in parallel (each a pure function of the
// replicate index), drops replicates whose estimation fails, and assembles
// one report per entity.
std::vector<SignificanceReport> run_test(
    const TimeSeriesData& data, const PipelineSpec& pipeline,
    const std::vector<BandSpec>& bands, const ResamplingConfig& rc, int jobs,
    MeasureKind kind, const std::vector<Multiplet>& entities,
    const std::string& measure_label, const std::string& sidedness,
    TestSide full_side, TestSide band_side,
    const std::function<TimeSeriesData(int)>& make_replicate) {
  const FrequencyGrid grid = FrequencyGrid::linear(pipeline.grid_points, data.fs);
  const ValueGrid original =
      evaluate_measure(data, pipeline, grid, bands, kind, entities);

  const int ns = rc.n_surrogates;
  std::vector<ValueGrid> replicate(ns);
  std::vector<char> ok(ns, 0);
  parallel_for(static_cast<std::size_t>(ns), jobs, [&](std::size_t s) {
    try {
      const TimeSeriesData d = make_replicate(static_cast<int>(s));
      replicate[s] =
          evaluate_measure(d, pipeline, grid, bands, kind, entities);
      ok[s] = 1;
    } catch (const estimation_error&) {
      ok[s] = 0;
    } catch (const numerical_error&) {
      ok[s] = 0;
    }
  });

  const int dropped =
      ns - static_cast<int>(std::count(ok.begin(), ok.end(), char{1}));
  if (dropped > ns / 10) {
    throw estimation_error(measure_label + " significance: " +
                           std::to_string(dropped) + " of " +
                           std::to_string(ns) +
                           " surrogates failed estimation (over 10%)");
  }

  const double half_fs = data.fs / 2.0;
  std::vector<SignificanceReport> reports;
  reports.reserve(entities.size());
  for (std::size_t e = 0; e < entities.size(); ++e) {
    SignificanceReport rep;
    rep.measure = measure_label;
    rep.blocks = entities[e];
    rep.sidedness = sidedness;
    rep.dropped_surrogates = dropped;
    const std::size_t n_cols = bands.size() + 1;
    for (std::size_t col = 0; col < n_cols; ++col) {
      std::vector<double> values;  // surviving replicates, replicate order
      values.reserve(ns);
      for (int s = 0; s < ns; ++s) {
        if (ok[s]) values.push_back(replicate[s].values[e][col]);
      }
      const std::string name = col == 0 ? "full" : bands[col - 1].name;
      const double lo = col == 0 ? 0.0 : bands[col - 1].f_low;
      const double hi = col == 0 ? half_fs : bands[col - 1].f_high;
      rep.decisions.push_back(decide(
          name, lo, hi, original.values[e][col], original.coverage[e][col],
          std::move(values), rc.alpha, col == 0 ? full_side : band_side));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

void check_common(const TimeSeriesData& data, const PipelineSpec& pipeline,
                  const std::vector<BandSpec>& bands,
                  const ResamplingConfig& rc, ResamplingMethod expected,
                  const char* op) {
  data.validate();
  rc.validate();
  if (rc.method != expected) {
    throw validation_error(std::string(op) +
                           " requires the matching resampling method");
  }
  pipeline.estimator.validate();
  pipeline.blocks.validate(data.channels());
  if (pipeline.grid_points < 2) {
    throw validation_error("grid_points must be at least 2");
  }
  for (const BandSpec& band : bands) band.validate(data.fs);
}

}  // namespace

// ---------------------------------------------------------------------------
// ResamplingConfig
// ---------------------------------------------------------------------------

void ResamplingConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw validation_error("alpha must lie in (0, 1)");
  }
  if (n_surrogates < 20) {
    throw validation_error("n_surrogates must be at least 20");
  }
  if (iaafft_iterations < 1) {
    throw validation_error("iaafft_iterations must be positive");
  }
  if (block_length < 0) {
    throw validation_error("block_length must be non-negative");
  }
}

// ---------------------------------------------------------------------------
// Percentile rule
// ---------------------------------------------------------------------------

double percentile_threshold(const std::vector<double>& sorted_values,
                            double p) {
  if (sorted_values.empty()) {
    throw validation_error("percentile of an empty sample");
  }
  const auto n = static_cast<long>(sorted_values.size());
  long idx = static_cast<long>(std::floor(p * static_cast<double>(n)));
  idx = std::clamp(idx, 0L, n - 1);
  return sorted_values[static_cast<std::size_t>(idx)];
}

// ---------------------------------------------------------------------------
// Resampling primitives
// ---------------------------------------------------------------------------

Eigen::VectorXd shuffle_surrogate(const Eigen::VectorXd& series,
                                  std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(series.size());
  if (n < 2) throw validation_error("shuffle_surrogate needs at least 2 samples");
  Rng rng(seed);
  const std::vector<std::size_t> p = rng.permutation(n);
  Eigen::VectorXd out(series.size());
  for (std::size_t i = 0; i < n; ++i) {
    out[static_cast<long>(i)] = series[static_cast<long>(p[i])];
  }
  return out;
}

Eigen::VectorXd iaafft_surrogate(const Eigen::VectorXd& series,
                                 std::uint64_t seed, int n_iter) {
  const int n = static_cast<int>(series.size());
  if (n < 4) throw validation_error("iaafft_surrogate needs at least 4 samples");
  if (n_iter < 1) throw validation_error("iaafft_surrogate needs n_iter >= 1");

  std::vector<double> sorted(series.data(), series.data() + n);
  std::sort(sorted.begin(), sorted.end());

  RealFft fft(n);
  const int nb = fft.n_bins();
  std::vector<std::complex<double>> spec(nb);
  fft.forward(series.data(), spec.data());
  std::vector<double> target(nb);
  double target_norm = 0.0;
  for (int b = 0; b < nb; ++b) {
    target[b] = std::abs(spec[b]);
    target_norm += target[b] * target[b];
  }
  target_norm = std::sqrt(target_norm);

  // Initial surrogate: original amplitudes with phases drawn uniformly on
  // [0, 2*pi); the DC bin keeps its value and the Nyquist bin stays real so
  // the inverse transform is a real series.
  Rng rng(seed);
  spec[0] = std::complex<double>(target[0], 0.0);
  const int last_random = (n % 2 == 0) ? nb - 2 : nb - 1;
  for (int b = 1; b <= last_random; ++b) {
    const double phi = 2.0 * std::numbers::pi * rng.uniform();
    spec[b] = std::polar(target[b], phi);
  }
  if (n % 2 == 0) spec[nb - 1] = std::complex<double>(target[nb - 1], 0.0);

  Eigen::VectorXd shaped(n);
  Eigen::VectorXd out(n);
  fft.inverse(spec.data(), shaped.data());
  rank_remap(sorted, shaped, out);

  // Alternate amplitude restoration and rank remapping until the amplitude
  // error stops changing (relative change below 1e-6) or n_iter rounds pass.
  double prev_err = std::numeric_limits<double>::infinity();
  for (int it = 0; it < n_iter; ++it) {
    fft.forward(out.data(), spec.data());
    double err = 0.0;
    for (int b = 0; b < nb; ++b) {
      const double diff = std::abs(spec[b]) - target[b];
      err += diff * diff;
    }
    err = target_norm > 0.0 ? std::sqrt(err) / target_norm : 0.0;
    if (std::abs(err - prev_err) < 1e-6) break;
    prev_err = err;
    for (int b = 0; b < nb; ++b) {
      const double mag = std::abs(spec[b]);
      spec[b] = mag > 0.0 ? spec[b] * (target[b] / mag)
                          : std::complex<double>(target[b], 0.0);
    }
    fft.inverse(spec.data(), shaped.data());
    rank_remap(sorted, shaped, out);
  }
  return out;
}

TimeSeriesData block_bootstrap(const TimeSeriesData& data, int block_length,
                               std::uint64_t seed) {
  data.validate();
  const long length = data.length();
  if (block_length < 1 || block_length > length) {
    throw validation_error("block_length must lie in [1, L]");
  }
  TimeSeriesData out;
  out.fs = data.fs;
  out.channel_names = data.channel_names;
  out.samples.resize(length, data.channels());
  Rng rng(seed);
  long row = 0;
  while (row < length) {
    const long start = static_cast<long>(
        rng.below(static_cast<std::uint64_t>(length - block_length + 1)));
    const long take = std::min<long>(block_length, length - row);
    out.samples.middleRows(row, take) = data.samples.middleRows(start, take);
    row += take;
  }
  return out;
}

int default_block_length(const TimeSeriesData& data) {
  data.validate();
  const long length = data.length();
  const int q = data.channels();
  const int base = static_cast<int>(
      std::ceil(std::cbrt(static_cast<double>(length))));

  // Correlation time: first lag where the running maximum (over larger lags)
  // of the channel-averaged absolute autocorrelation drops below 1/e.
  const int cap = static_cast<int>(std::min<long>(100, length - 1));
  std::vector<double> mean_abs(cap + 1, 0.0);
  Eigen::MatrixXd centered = data.samples;
  for (int c = 0; c < q; ++c) {
    centered.col(c).array() -= centered.col(c).mean();
  }
  for (int c = 0; c < q; ++c) {
    const double denom = centered.col(c).squaredNorm();
    for (int k = 1; k <= cap; ++k) {
      const double num =
          centered.col(c).head(length - k).dot(centered.col(c).tail(length - k));
      mean_abs[k] += denom > 0.0 ? std::abs(num / denom) : 0.0;
    }
  }
  for (int k = 1; k <= cap; ++k) mean_abs[k] /= q;

  int tau = cap;
  double suffix_max = 0.0;
  std::vector<double> running(cap + 1, 0.0);
  for (int k = cap; k >= 1; --k) {
    suffix_max = std::max(suffix_max, mean_abs[k]);
    running[k] = suffix_max;
  }
  const double threshold = std::exp(-1.0);
  for (int k = 1; k <= cap; ++k) {
    if (running[k] < threshold) {
      tau = k;
      break;
    }
  }
  tau = std::max(tau, 1);

  const long upper = std::max<long>(base, length / 20);
  const long b = std::clamp<long>(static_cast<long>(base) * tau, base, upper);
  return static_cast<int>(std::min<long>(b, length));
}

// ---------------------------------------------------------------------------
// Validators
// ---------------------------------------------------------------------------

std::vector<SignificanceReport> validate_er(const TimeSeriesData& data,
                                            const PipelineSpec& pipeline,
                                            const std::vector<BandSpec>& bands,
                                            const ResamplingConfig& rc,
                                            int jobs) {
  check_common(data, pipeline, bands, rc, ResamplingMethod::kShuffle,
               "validate_er");
  const int q = data.channels();
  std::vector<Multiplet> entities;
  for (int b = 0; b < pipeline.blocks.n_blocks(); ++b) entities.push_back({b});

  auto make = [&](int s) {
    TimeSeriesData d;
    d.fs = data.fs;
    d.channel_names = data.channel_names;
    d.samples.resize(data.length(), q);
    for (int c = 0; c < q; ++c) {
      d.samples.col(c) = shuffle_surrogate(
          data.samples.col(c),
          stream_seed(rc.master_seed, "er-shuffle",
                      static_cast<std::uint64_t>(s) * q + c));
    }
    return d;
  };
  return run_test(data, pipeline, bands, rc, jobs, MeasureKind::kEr, entities,
                  "ER",
                  "full band: one-sided lower; bands: two-sided at alpha/2",
                  TestSide::kLowerOnly, TestSide::kTwoSided, make);
}

std::vector<SignificanceReport> validate_mir(const TimeSeriesData& data,
                                             const PipelineSpec& pipeline,
                                             const std::vector<BandSpec>& bands,
                                             const ResamplingConfig& rc,
                                             int jobs) {
  check_common(data, pipeline, bands, rc, ResamplingMethod::kIaafft,
               "validate_mir");
  if (data.length() < 4) {
    throw validation_error("validate_mir needs at least 4 samples");
  }
  const int q = data.channels();
  const int n_blocks = pipeline.blocks.n_blocks();
  if (n_blocks < 2) {
    throw validation_error("validate_mir needs at least 2 blocks");
  }
  std::vector<Multiplet> entities;
  for (int i = 0; i < n_blocks; ++i) {
    for (int j = i + 1; j < n_blocks; ++j) entities.push_back({i, j});
  }

  auto make = [&](int s) {
    TimeSeriesData d;
    d.fs = data.fs;
    d.channel_names = data.channel_names;
    d.samples.resize(data.length(), q);
    for (int c = 0; c < q; ++c) {
      d.samples.col(c) = iaafft_surrogate(
          data.samples.col(c),
          stream_seed(rc.master_seed, "mir-iaafft",
                      static_cast<std::uint64_t>(s) * q + c),
          rc.iaafft_iterations);
    }
    return d;
  };
  return run_test(data, pipeline, bands, rc, jobs, MeasureKind::kMir, entities,
                  "MIR", "one-sided upper at 1-alpha", TestSide::kUpperOnly,
                  TestSide::kUpperOnly, make);
}

std::vector<SignificanceReport> validate_oir(
    const TimeSeriesData& data, const PipelineSpec& pipeline,
    const std::vector<Multiplet>& multiplets, const std::vector<BandSpec>& bands,
    const ResamplingConfig& rc, int jobs) {
  check_common(data, pipeline, bands, rc, ResamplingMethod::kBlockBootstrap,
               "validate_oir");
  if (multiplets.empty()) {
    throw validation_error("validate_oir needs at least one multiplet");
  }
  const int n_blocks = pipeline.blocks.n_blocks();
  for (const Multiplet& m : multiplets) {
    if (m.size() < 2) {
      throw validation_error("OIR multiplets need at least 2 blocks");
    }
    for (int id : m) {
      if (id < 0 || id >= n_blocks) {
        throw validation_error("multiplet block id out of range");
      }
    }
  }

  const int block_len =
      rc.block_length > 0 ? rc.block_length : default_block_length(data);
  if (block_len > data.length()) {
    throw validation_error("block_length exceeds the series length");
  }

  auto make = [&](int s) {
    return block_bootstrap(
        data, block_len,
        stream_seed(rc.master_seed, "oir-bootstrap",
                    static_cast<std::uint64_t>(s)));
  };
  return run_test(data, pipeline, bands, rc, jobs, MeasureKind::kOir,
                  multiplets, "OIR",
                  "bootstrap central interval; sign labels redundancy(+) / "
                  "synergy(-)",
                  TestSide::kZeroOutside, TestSide::kZeroOutside, make);
}

}  // namespace infodyn
