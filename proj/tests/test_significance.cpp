#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "infodyn/errors.hpp"
#include "infodyn/fft.hpp"
#include "infodyn/scenarios.hpp"
#include "infodyn/significance.hpp"
#include "infodyn/var_model.hpp"

using namespace infodyn;

namespace {

VarModel scalar_ar2(double rho, double f_norm) {
  VarModel m;
  m.q = 1;
  m.p = 2;
  m.fs = 1.0;
  const auto [a1, a2] = poles_to_coeffs(rho, f_norm);
  m.coeffs = {Eigen::MatrixXd::Constant(1, 1, a1),
              Eigen::MatrixXd::Constant(1, 1, a2)};
  m.sigma_u = Eigen::MatrixXd::Identity(1, 1);
  return m;
}

VarModel white_model(int q) {
  VarModel m;
  m.q = q;
  m.p = 1;
  m.fs = 1.0;
  m.coeffs = {Eigen::MatrixXd::Zero(q, q)};
  m.sigma_u = Eigen::MatrixXd::Identity(q, q);
  return m;
}

// Two uncoupled oscillators at distinct frequencies.
VarModel independent_pair() {
  VarModel m;
  m.q = 2;
  m.p = 2;
  m.fs = 1.0;
  m.coeffs = {Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 2)};
  m.sigma_u = Eigen::MatrixXd::Identity(2, 2);
  const auto [a1, a2] = poles_to_coeffs(0.9, 0.1);
  const auto [b1, b2] = poles_to_coeffs(0.9, 0.3);
  m.coeffs[0](0, 0) = a1;
  m.coeffs[1](0, 0) = a2;
  m.coeffs[0](1, 1) = b1;
  m.coeffs[1](1, 1) = b2;
  return m;
}

std::vector<double> sorted_amplitudes(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  RealFft fft(n);
  std::vector<std::complex<double>> spec(fft.n_bins());
  fft.forward(x.data(), spec.data());
  std::vector<double> amp(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) amp[i] = std::abs(spec[i]);
  return amp;
}

PipelineSpec var_pipeline(const BlockStructure& blocks, int grid, int order) {
  PipelineSpec spec;
  spec.estimator.kind = EstimatorKind::kVar;
  spec.estimator.var_order = order;
  spec.blocks = blocks;
  spec.grid_points = grid;
  return spec;
}

}  // namespace

TEST_CASE("percentile rule picks the documented order statistic") {
  std::vector<double> sorted(100);
  for (int i = 0; i < 100; ++i) sorted[i] = static_cast<double>(i);
  // alpha = 0.05: the 95th percentile of 100 values is index 95, i.e. the
  // 96th order statistic.
  CHECK(percentile_threshold(sorted, 0.95) == 95.0);
  CHECK(percentile_threshold(sorted, 0.025) == 2.0);
  CHECK(percentile_threshold(sorted, 0.975) == 97.0);
  CHECK(percentile_threshold(sorted, 0.0) == 0.0);
  CHECK(percentile_threshold(sorted, 1.0) == 99.0);  // clamped to the top
}

TEST_CASE("resampling config invariants") {
  ResamplingConfig rc;
  CHECK_NOTHROW(rc.validate());
  rc.alpha = 0.0;
  CHECK_THROWS_AS(rc.validate(), validation_error);
  rc.alpha = 0.05;
  rc.n_surrogates = 19;
  CHECK_THROWS_AS(rc.validate(), validation_error);
}

TEST_CASE("shuffle surrogate permutes and decorrelates") {
  const TimeSeriesData data = simulate(scalar_ar2(0.95, 0.1), 10000, 1000, 31);
  const Eigen::VectorXd x = data.samples.col(0);
  const Eigen::VectorXd s = shuffle_surrogate(x, 77);
  const Eigen::VectorXd s2 = shuffle_surrogate(x, 77);
  const Eigen::VectorXd s3 = shuffle_surrogate(x, 78);
  CHECK(s == s2);
  CHECK(s != s3);

  std::vector<double> a(x.data(), x.data() + x.size());
  std::vector<double> b(s.data(), s.data() + s.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);  // identical multiset

  // Lag-1 autocorrelation of the shuffled series is near zero even though
  // the original is strongly autocorrelated.
  const auto lag1 = [](const Eigen::VectorXd& v) {
    const long n = v.size();
    const double mean = v.mean();
    const Eigen::VectorXd c = v.array() - mean;
    return c.head(n - 1).dot(c.tail(n - 1)) / c.squaredNorm();
  };
  CHECK(std::abs(lag1(x)) > 0.5);
  CHECK(std::abs(lag1(s)) < 0.05);
}

TEST_CASE("iAAFT surrogate keeps the multiset and the amplitude spectrum") {
  const TimeSeriesData data = simulate(scalar_ar2(0.95, 0.1), 4096, 500, 13);
  const Eigen::VectorXd x = data.samples.col(0);
  const Eigen::VectorXd s = iaafft_surrogate(x, 5, 100);
  CHECK(s == iaafft_surrogate(x, 5, 100));
  CHECK(s != x);

  std::vector<double> a(x.data(), x.data() + x.size());
  std::vector<double> b(s.data(), s.data() + s.size());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);

  // Relative L2 distance between amplitude spectra is below 5%.
  const std::vector<double> ax = sorted_amplitudes(x);
  const std::vector<double> as = sorted_amplitudes(s);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    num += (ax[i] - as[i]) * (ax[i] - as[i]);
    den += ax[i] * ax[i];
  }
  CHECK(std::sqrt(num / den) < 0.05);
}

TEST_CASE("block bootstrap keeps rows together and is identity at b = L") {
  const TimeSeriesData data = simulate(independent_pair(), 500, 100, 7);

  const TimeSeriesData same = block_bootstrap(data, 500, 3);
  CHECK(same.samples == data.samples);

  const TimeSeriesData boot = block_bootstrap(data, 30, 3);
  CHECK(boot.length() == data.length());
  CHECK(boot.samples == block_bootstrap(data, 30, 3).samples);
  // Every resampled row is a row of the input: rows are drawn jointly.
  for (long r = 0; r < boot.length(); ++r) {
    bool found = false;
    for (long s = 0; s < data.length() && !found; ++s) {
      found = (boot.samples.row(r) - data.samples.row(s)).cwiseAbs().maxCoeff() == 0.0;
    }
    CHECK(found);
  }

  CHECK_THROWS_AS(block_bootstrap(data, 0, 1), validation_error);
  CHECK_THROWS_AS(block_bootstrap(data, 501, 1), validation_error);
}

TEST_CASE("default block length grows with temporal correlation") {
  const TimeSeriesData white = simulate(white_model(2), 1000, 0, 9);
  const TimeSeriesData slow = simulate(scalar_ar2(0.98, 0.02), 1000, 500, 9);
  const int b_white = default_block_length(white);
  const int b_slow = default_block_length(slow);
  CHECK(b_white == 10);  // ceil(1000^(1/3)) with correlation time 1
  CHECK(b_slow > b_white);
  CHECK(b_slow <= 1000 / 20);
}

TEST_CASE("validate_er: white-noise null keeps the full band inside") {
  const TimeSeriesData data = simulate(white_model(2), 400, 100, 101);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 128, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kShuffle;
  rc.master_seed = 55;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const auto reports = validate_er(data, pipeline, bands, rc);
  REQUIRE(reports.size() == 2);
  for (const auto& report : reports) {
    CHECK(report.measure == "ER");
    CHECK(report.dropped_surrogates == 0);
    REQUIRE(report.decisions.size() == 2);
    CHECK(report.decisions[0].band_name == "full");
    CHECK_FALSE(report.decisions[0].significant);
    CHECK(report.decisions[0].surrogate_values.size() == 20);
    // Full band uses the one-sided lower rule: no upper threshold.
    CHECK(std::isnan(report.decisions[0].threshold_high));
    CHECK_FALSE(std::isnan(report.decisions[0].threshold_low));
    // Bands use the two-sided rule: both thresholds present.
    CHECK_FALSE(std::isnan(report.decisions[1].threshold_low));
    CHECK_FALSE(std::isnan(report.decisions[1].threshold_high));
  }
}

TEST_CASE("validate_er: an oscillator's band power crosses the upper bound") {
  const TimeSeriesData data = simulate(scalar_ar2(0.95, 0.1), 4096, 500, 19);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(1), 256, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kShuffle;
  rc.master_seed = 77;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const auto reports = validate_er(data, pipeline, bands, rc);
  REQUIRE(reports.size() == 1);
  const BandDecision& lf = reports[0].decisions[1];
  CHECK(lf.band_name == "LF");
  CHECK(lf.significant);
  CHECK(lf.crossed_side == 1);  // above the upper threshold
  CHECK(lf.original > lf.threshold_high);
}

TEST_CASE("validate_er rejects a mismatched resampling method") {
  const TimeSeriesData data = simulate(white_model(2), 300, 0, 1);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 64, 1);
  ResamplingConfig rc;
  rc.method = ResamplingMethod::kIaafft;
  CHECK_THROWS_AS(validate_er(data, pipeline, {}, rc), validation_error);
}

TEST_CASE("validate_mir: independent oscillators stay below threshold") {
  const TimeSeriesData data = simulate(independent_pair(), 1024, 500, 204);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 128, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kIaafft;
  rc.master_seed = 11;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}, {"HF", 0.15, 0.4}};
  const auto reports = validate_mir(data, pipeline, bands, rc);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].measure == "MIR");
  CHECK(reports[0].blocks == std::vector<int>{0, 1});
  for (const BandDecision& d : reports[0].decisions) {
    CHECK_FALSE(d.significant);
    // One-sided upper rule everywhere: no lower threshold.
    CHECK(std::isnan(d.threshold_low));
  }
}

TEST_CASE("validate_mir: the coupled star-receiver pair is significant") {
  const Scenario sc = build_star_receiver();
  const TimeSeriesData full = simulate(sc.model, 4096, 1000, 37);
  TimeSeriesData pair;
  pair.fs = full.fs;
  pair.samples = full.samples.leftCols(2);
  pair.channel_names = {"Y1", "Y2"};

  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 256, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kIaafft;
  rc.master_seed = 23;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const auto reports = validate_mir(pair, pipeline, bands, rc);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].decisions[1].significant);  // band around 0.1 Hz
  CHECK(reports[0].decisions[1].crossed_side == 1);
}

TEST_CASE("validate_oir: independent processes straddle zero") {
  VarModel m = white_model(3);
  m.coeffs[0].diagonal().setConstant(0.5);
  const TimeSeriesData data = simulate(m, 2000, 200, 311);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(3), 128, 1);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kBlockBootstrap;
  rc.master_seed = 41;

  const std::vector<Multiplet> multiplets = {{0, 1, 2}};
  const auto reports = validate_oir(data, pipeline, multiplets, {}, rc);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].measure == "OIR");
  const BandDecision& full = reports[0].decisions[0];
  CHECK_FALSE(full.significant);
  CHECK(full.threshold_low < 0.0);
  CHECK(full.threshold_high > 0.0);
}

TEST_CASE("validate_oir: star-sender triplet is significant redundancy") {
  const Scenario sc = build_star_sender();
  const TimeSeriesData data = simulate(sc.model, 10000, 1000, 73);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(5), 256, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kBlockBootstrap;
  rc.master_seed = 91;

  const std::vector<Multiplet> multiplets = {{0, 1, 2}};
  const std::vector<BandSpec> bands = {{"HF", 0.15, 0.4}};
  const auto reports = validate_oir(data, pipeline, multiplets, bands, rc);
  REQUIRE(reports.size() == 1);
  const BandDecision& hf = reports[0].decisions[1];
  CHECK(hf.significant);
  CHECK(hf.crossed_side == 1);  // positive original: redundancy
  CHECK(hf.original > 0.0);
}

TEST_CASE("decisions are recomputable from the stored report") {
  const TimeSeriesData data = simulate(independent_pair(), 512, 100, 7);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 64, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 24;
  rc.method = ResamplingMethod::kShuffle;
  rc.master_seed = 3;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const auto reports = validate_er(data, pipeline, bands, rc);
  for (const auto& report : reports) {
    // Full band: one-sided lower at alpha.
    {
      const BandDecision& d = report.decisions[0];
      std::vector<double> sorted = d.surrogate_values;
      std::sort(sorted.begin(), sorted.end());
      CHECK(percentile_threshold(sorted, rc.alpha) == d.threshold_low);
      CHECK(d.significant == (d.original < d.threshold_low));
    }
    // Band: two-sided at alpha/2.
    {
      const BandDecision& d = report.decisions[1];
      std::vector<double> sorted = d.surrogate_values;
      std::sort(sorted.begin(), sorted.end());
      CHECK(percentile_threshold(sorted, rc.alpha / 2.0) == d.threshold_low);
      CHECK(percentile_threshold(sorted, 1.0 - rc.alpha / 2.0) ==
            d.threshold_high);
      CHECK(d.significant ==
            (d.original < d.threshold_low || d.original > d.threshold_high));
    }
  }
}

TEST_CASE("reports are identical across job counts") {
  const TimeSeriesData data = simulate(independent_pair(), 512, 100, 29);
  const PipelineSpec pipeline =
      var_pipeline(BlockStructure::singletons(2), 64, 2);
  ResamplingConfig rc;
  rc.n_surrogates = 20;
  rc.method = ResamplingMethod::kIaafft;
  rc.master_seed = 12;

  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const auto a = validate_mir(data, pipeline, bands, rc, 1);
  const auto b = validate_mir(data, pipeline, bands, rc, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].decisions.size() == b[i].decisions.size());
    for (std::size_t d = 0; d < a[i].decisions.size(); ++d) {
      CHECK(a[i].decisions[d].original == b[i].decisions[d].original);
      CHECK(a[i].decisions[d].surrogate_values ==
            b[i].decisions[d].surrogate_values);
      CHECK(a[i].decisions[d].significant == b[i].decisions[d].significant);
    }
  }
}
