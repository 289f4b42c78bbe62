#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "infodyn/rates.hpp"
#include "infodyn/spectral.hpp"

namespace infodyn {

enum class ResamplingMethod { kShuffle, kIaafft, kBlockBootstrap };

struct ResamplingConfig {
  int n_surrogates = 100;
  double alpha = 0.05;
  ResamplingMethod method = ResamplingMethod::kShuffle;
  int iaafft_iterations = 100;
  int block_length = 0;  // 0 selects the default rule
  std::uint64_t master_seed = 0;

  void validate() const;
};

// Estimation settings the validators share with the analysis pipeline: the
// same estimator, grid and block structure are applied to the original data
// and to every surrogate/bootstrap replicate.
struct PipelineSpec {
  EstimatorSpec estimator;
  BlockStructure blocks;
  int grid_points = 4096;
};

// Decision for one band (index 0 is always the full band).
struct BandDecision {
  std::string band_name;
  double f_low = 0.0;
  double f_high = 0.0;
  double original = 0.0;
  double coverage = 1.0;
  // Percentile thresholds; NaN when the side is unused by the decision rule.
  double threshold_low = 0.0;
  double threshold_high = 0.0;
  bool significant = false;
  int crossed_side = 0;  // -1 below lower, +1 above upper, 0 inside
  std::vector<double> surrogate_values;  // replicate order, dropped ones omitted
};

struct SignificanceReport {
  std::string measure;      // "ER", "MIR" or "OIR"
  std::vector<int> blocks;  // block ids the measure refers to
  std::string sidedness;
  int dropped_surrogates = 0;
  std::vector<BandDecision> decisions;
};

// Percentile threshold rule used throughout: with N values sorted ascending,
// threshold(p) = sorted[min(N-1, floor(p*N))]. For p = 0.95 and N = 100 this
// selects index 95, i.e. the 96th order statistic.
double percentile_threshold(const std::vector<double>& sorted_values, double p);

// Uniform random permutation of one channel (destroys all temporal structure
// while preserving the value multiset exactly).
Eigen::VectorXd shuffle_surrogate(const Eigen::VectorXd& series,
                                  std::uint64_t seed);

// Iterative amplitude-adjusted Fourier transform surrogate: preserves the
// value multiset exactly and the amplitude spectrum approximately while
// randomizing Fourier phases. Iteration stops at n_iter or when the relative
// amplitude error changes by less than 1e-6 between rounds.
Eigen::VectorXd iaafft_surrogate(const Eigen::VectorXd& series,
                                 std::uint64_t seed, int n_iter = 100);

// Joint block bootstrap: ceil(L/b) contiguous row blocks of length b sampled
// uniformly with replacement, concatenated and truncated to L rows. Rows are
// resampled jointly so simultaneous samples stay together.
TimeSeriesData block_bootstrap(const TimeSeriesData& data, int block_length,
                               std::uint64_t seed);

// Default bootstrap block length: ceil(L^(1/3)) scaled by an estimated
// correlation time (first lag where the running maximum of the channel-mean
// absolute autocorrelation falls below 1/e), clamped to [ceil(L^(1/3)), L/20].
int default_block_length(const TimeSeriesData& data);

// Entropy-rate test against shuffled surrogates (each channel independently).
// Full band: one-sided lower rule (significant below the alpha percentile).
// Bands: two-sided rule at alpha/2 on each side.
std::vector<SignificanceReport> validate_er(const TimeSeriesData& data,
                                            const PipelineSpec& pipeline,
                                            const std::vector<BandSpec>& bands,
                                            const ResamplingConfig& rc,
                                            int jobs = 1);

// MIR test against iAAFT surrogates (phases randomized independently per
// channel): one-sided upper rule at the 1-alpha percentile, all block pairs.
std::vector<SignificanceReport> validate_mir(const TimeSeriesData& data,
                                             const PipelineSpec& pipeline,
                                             const std::vector<BandSpec>& bands,
                                             const ResamplingConfig& rc,
                                             int jobs = 1);

// OIR test against the block-bootstrap distribution: significant when zero
// lies outside the central 1-alpha percentile interval.
std::vector<SignificanceReport> validate_oir(
    const TimeSeriesData& data, const PipelineSpec& pipeline,
    const std::vector<Multiplet>& multiplets, const std::vector<BandSpec>& bands,
    const ResamplingConfig& rc, int jobs = 1);

}  // namespace infodyn
