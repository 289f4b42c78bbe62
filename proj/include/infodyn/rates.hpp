#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "infodyn/spectral.hpp"

namespace infodyn {

enum class MeasureKind { kEr, kMir, kIir, kOir, kOirGradient };

std::string measure_name(MeasureKind kind);

// Real-valued spectral profile of one measure over the grid, in nats per unit
// normalized angular frequency. Grid points where a required log-determinant
// was numerically singular hold NaN and are counted in singular_points.
struct RateProfile {
  FrequencyGrid grid;
  std::vector<double> values;
  MeasureKind kind = MeasureKind::kEr;
  std::vector<int> blocks;  // block ids involved, in call order
  int singular_points = 0;
};

// Frequency band in Hz within [0, fs/2].
struct BandSpec {
  std::string name;
  double f_low = 0.0;
  double f_high = 0.0;

  void validate(double fs) const;
};

// Ordered list of distinct block ids.
using Multiplet = std::vector<int>;

// Memoized per-frequency log-determinants of PSD sub-matrices, keyed by the
// channel subset. Every ER/MIR/OIR value is a signed combination of these, so
// caching them collapses the combinatorial cost of multiplet sweeps. Safe for
// concurrent use: racing computations of the same subset produce identical
// values and the first inserted entry wins.
class LogDetCache {
 public:
  LogDetCache(const SpectralMatrix& psd, const BlockStructure& blocks);

  const SpectralMatrix& psd() const { return *psd_; }
  const BlockStructure& blocks() const { return *blocks_; }

  // log|P_S(omega)| per grid point for the channel union S of the given
  // blocks; NaN marks a singular point (Cholesky pivot <= 1e-12 * trace).
  const std::vector<double>& logdets(const Multiplet& block_ids);

 private:
  const SpectralMatrix* psd_;
  const BlockStructure* blocks_;
  std::mutex mutex_;
  std::unordered_map<std::uint64_t, std::vector<double>> cache_;
};

// log|A| of a Hermitian positive-definite matrix via Cholesky; returns NaN
// when a pivot falls at or below 1e-12 times the trace (singular flag).
double hermitian_logdet(const Eigen::MatrixXcd& a);

// Spectral entropy rate of one block: h(omega) = 0.5*ln((2*pi*e)^M_i |P_i|).
RateProfile spectral_er(LogDetCache& cache, int block);
RateProfile spectral_er(const SpectralMatrix& psd, const BlockStructure& blocks,
                        int block);

// Spectral mutual information rate between two disjoint block groups:
// i(omega) = 0.5*ln(|P_a||P_b| / |P_ab|). The two-argument form is the
// pairwise i <-> j measure; the group form serves the OIR gradient where
// context blocks are merged into one joint process.
RateProfile spectral_mir(LogDetCache& cache, const Multiplet& a,
                         const Multiplet& b);
RateProfile spectral_mir(LogDetCache& cache, int i, int j);
RateProfile spectral_mir(const SpectralMatrix& psd, const BlockStructure& blocks,
                         int i, int j);

// OIR gradient of `target` joining `context` (N-1 blocks, N >= 3):
// delta(omega) = sum_i i_{target; context\i} + (2-N) * i_{target; context}.
RateProfile spectral_oir_gradient(LogDetCache& cache, int target,
                                  const Multiplet& context);
RateProfile spectral_oir_gradient(const SpectralMatrix& psd,
                                  const BlockStructure& blocks, int target,
                                  const Multiplet& context);

// O-information rate built iteratively from gradients, seeded by the
// identically-zero profile at N = 2. Positive values mark redundancy,
// negative synergy.
RateProfile spectral_oir(LogDetCache& cache, const Multiplet& multiplet);
RateProfile spectral_oir(const SpectralMatrix& psd, const BlockStructure& blocks,
                         const Multiplet& multiplet);

// Band integral (1/pi) * Int_{omega_low}^{omega_high} profile d(omega) using
// the trapezoidal rule on the snapped grid segment; the factor accounts for
// the conjugate-symmetric negative half-spectrum. Singular (NaN) points are
// excluded and reported through the coverage fraction; a band with no valid
// point is an error. Integrating over [0, fs/2] yields the time-domain value.
struct BandValue {
  double value = 0.0;
  double coverage = 1.0;
};

BandValue integrate_band(const RateProfile& profile, const BandSpec& band);
double integrate_full(const RateProfile& profile);

// All C(M, n) block combinations in lexicographic order.
std::vector<Multiplet> enumerate_multiplets(int n_blocks, int n);

// Batch evaluation: ER per block, MIR per pair, OIR per multiplet of orders
// 3..max_order, each with full-band and per-band integrals.
struct RateEntry {
  RateProfile profile;
  BandValue full_band;
  std::vector<BandValue> band_values;  // parallel to the bands argument
};

struct RateTable {
  std::vector<RateEntry> entries;
  std::vector<BandSpec> bands;

  const RateEntry* find(MeasureKind kind, const std::vector<int>& blocks) const;
};

RateTable all_rates(const SpectralMatrix& psd, const BlockStructure& blocks,
                    int max_order, const std::vector<BandSpec>& bands,
                    int jobs = 1);

}  // namespace infodyn
