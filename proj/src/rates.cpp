#include "infodyn/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "infodyn/parallel.hpp"

namespace infodyn {

namespace {
const double kLn2PiE = std::log(2.0 * std::numbers::pi) + 1.0;
const double kNan = std::numeric_limits<double>::quiet_NaN();
}  // namespace

std::string measure_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::kEr:
      return "ER";
    case MeasureKind::kMir:
      return "MIR";
    case MeasureKind::kIir:
      return "IIR";
    case MeasureKind::kOir:
      return "OIR";
    case MeasureKind::kOirGradient:
      return "OIR_GRADIENT";
  }
  return "?";
}

void BandSpec::validate(double fs) const {
  if (name.empty()) throw validation_error("band name must not be empty");
  if (!(f_low >= 0.0) || !(f_high <= fs / 2.0 + 1e-12) || !(f_low < f_high)) {
    throw validation_error("band '" + name +
                           "' must satisfy 0 <= f_low < f_high <= fs/2");
  }
}

double hermitian_logdet(const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  const double pivot_floor = 1e-12 * std::abs(a.trace().real());
  Eigen::MatrixXcd l = a;
  double log_det = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = l(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > pivot_floor)) return kNan;  // singular or non-finite pivot
    log_det += std::log(d);
    const double root = std::sqrt(d);
    l(j, j) = root;
    for (int i = j + 1; i < n; ++i) {
      std::complex<double> v = l(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * std::conj(l(j, k));
      l(i, j) = v / root;
    }
  }
  return log_det;
}

LogDetCache::LogDetCache(const SpectralMatrix& psd, const BlockStructure& blocks)
    : psd_(&psd), blocks_(&blocks) {
  blocks.validate(psd.channels());
  if (psd.channels() > 64) {
    throw validation_error("log-determinant cache supports at most 64 channels");
  }
}

const std::vector<double>& LogDetCache::logdets(const Multiplet& block_ids) {
  const std::vector<int> channels = blocks_->channels_of(block_ids);
  std::uint64_t key = 0;
  for (int ch : channels) key |= std::uint64_t{1} << ch;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  const int n = static_cast<int>(channels.size());
  const int n_freq = psd_->grid.n_freq;
  std::vector<double> values(n_freq);
  Eigen::MatrixXcd sub(n, n);
  for (int f = 0; f < n_freq; ++f) {
    const Eigen::MatrixXcd& full = psd_->values[f];
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) sub(a, b) = full(channels[a], channels[b]);
    }
    values[f] = hermitian_logdet(sub);
  }

  std::lock_guard<std::mutex> lock(mutex_);
  // If another thread inserted the same key meanwhile, its value is identical;
  // emplace keeps the existing entry. References stay valid across rehashes.
  auto [it, inserted] = cache_.emplace(key, std::move(values));
  (void)inserted;
  return it->second;
}

namespace {

void require_distinct(const Multiplet& m, const char* what) {
  Multiplet sorted = m;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw validation_error(std::string(what) + " contains repeated blocks");
  }
}

Multiplet merged(const Multiplet& a, const Multiplet& b) {
  Multiplet m = a;
  m.insert(m.end(), b.begin(), b.end());
  return m;
}

RateProfile make_profile(const LogDetCache& cache, MeasureKind kind,
                         std::vector<int> blocks, std::vector<double> values) {
  RateProfile p;
  p.grid = cache.psd().grid;
  p.values = std::move(values);
  p.kind = kind;
  p.blocks = std::move(blocks);
  p.singular_points = static_cast<int>(
      std::count_if(p.values.begin(), p.values.end(),
                    [](double v) { return std::isnan(v); }));
  return p;
}

// 0.5 * (ld_a + ld_b - ld_ab) per grid point; the (2*pi*e) powers cancel.
std::vector<double> mir_values(LogDetCache& cache, const Multiplet& a,
                               const Multiplet& b) {
  const std::vector<double>& ld_a = cache.logdets(a);
  const std::vector<double>& ld_b = cache.logdets(b);
  const std::vector<double>& ld_ab = cache.logdets(merged(a, b));
  std::vector<double> out(ld_a.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = 0.5 * (ld_a[f] + ld_b[f] - ld_ab[f]);
  }
  return out;
}

}  // namespace

RateProfile spectral_er(LogDetCache& cache, int block) {
  const std::vector<double>& ld = cache.logdets({block});
  const double m_i = cache.blocks().block_size(block);
  std::vector<double> values(ld.size());
  for (std::size_t f = 0; f < values.size(); ++f) {
    values[f] = 0.5 * (m_i * kLn2PiE + ld[f]);
  }
  return make_profile(cache, MeasureKind::kEr, {block}, std::move(values));
}

RateProfile spectral_er(const SpectralMatrix& psd, const BlockStructure& blocks,
                        int block) {
  LogDetCache cache(psd, blocks);
  return spectral_er(cache, block);
}

RateProfile spectral_mir(LogDetCache& cache, const Multiplet& a,
                         const Multiplet& b) {
  if (a.empty() || b.empty()) throw validation_error("MIR needs non-empty groups");
  require_distinct(merged(a, b), "MIR block groups");
  Multiplet involved = merged(a, b);
  return make_profile(cache, MeasureKind::kMir, std::move(involved),
                      mir_values(cache, a, b));
}

RateProfile spectral_mir(LogDetCache& cache, int i, int j) {
  if (i == j) throw validation_error("MIR needs two distinct blocks");
  return spectral_mir(cache, Multiplet{i}, Multiplet{j});
}

RateProfile spectral_mir(const SpectralMatrix& psd, const BlockStructure& blocks,
                         int i, int j) {
  LogDetCache cache(psd, blocks);
  return spectral_mir(cache, i, j);
}

RateProfile spectral_oir_gradient(LogDetCache& cache, int target,
                                  const Multiplet& context) {
  if (context.size() < 2) {
    throw validation_error("OIR gradient needs a context of at least 2 blocks");
  }
  Multiplet all = context;
  all.push_back(target);
  require_distinct(all, "OIR gradient blocks");

  const int n = static_cast<int>(context.size()) + 1;
  const int n_freq = cache.psd().grid.n_freq;
  std::vector<double> values(n_freq, 0.0);
  for (std::size_t drop = 0; drop < context.size(); ++drop) {
    Multiplet reduced;
    for (std::size_t k = 0; k < context.size(); ++k) {
      if (k != drop) reduced.push_back(context[k]);
    }
    const std::vector<double> term = mir_values(cache, {target}, reduced);
    for (int f = 0; f < n_freq; ++f) values[f] += term[f];
  }
  const std::vector<double> full_term = mir_values(cache, {target}, context);
  const double coeff = 2.0 - n;
  for (int f = 0; f < n_freq; ++f) values[f] += coeff * full_term[f];
  return make_profile(cache, MeasureKind::kOirGradient, std::move(all),
                      std::move(values));
}

RateProfile spectral_oir_gradient(const SpectralMatrix& psd,
                                  const BlockStructure& blocks, int target,
                                  const Multiplet& context) {
  LogDetCache cache(psd, blocks);
  return spectral_oir_gradient(cache, target, context);
}

RateProfile spectral_oir(LogDetCache& cache, const Multiplet& multiplet) {
  if (multiplet.size() < 2) {
    throw validation_error("OIR needs a multiplet of at least 2 blocks");
  }
  require_distinct(multiplet, "OIR multiplet");
  const int n_freq = cache.psd().grid.n_freq;
  std::vector<double> values(n_freq, 0.0);  // nu at N = 2 is identically zero
  for (std::size_t n = 3; n <= multiplet.size(); ++n) {
    const Multiplet context(multiplet.begin(), multiplet.begin() + (n - 1));
    const RateProfile grad =
        spectral_oir_gradient(cache, multiplet[n - 1], context);
    for (int f = 0; f < n_freq; ++f) values[f] += grad.values[f];
  }
  return make_profile(cache, MeasureKind::kOir, multiplet, std::move(values));
}

RateProfile spectral_oir(const SpectralMatrix& psd, const BlockStructure& blocks,
                         const Multiplet& multiplet) {
  LogDetCache cache(psd, blocks);
  return spectral_oir(cache, multiplet);
}

BandValue integrate_band(const RateProfile& profile, const BandSpec& band) {
  band.validate(profile.grid.fs);
  const int i_low = profile.grid.snap_index(band.f_low);
  const int i_high = profile.grid.snap_index(band.f_high);

  int valid = 0;
  double sum = 0.0;
  double prev_omega = 0.0, prev_value = 0.0;
  bool have_prev = false;
  for (int i = i_low; i <= i_high; ++i) {
    const double v = profile.values[i];
    if (std::isnan(v)) continue;
    ++valid;
    if (have_prev) {
      sum += 0.5 * (v + prev_value) * (profile.grid.omegas[i] - prev_omega);
    }
    prev_omega = profile.grid.omegas[i];
    prev_value = v;
    have_prev = true;
  }
  const int total = i_high - i_low + 1;
  if (valid == 0) {
    throw numerical_error("band '" + band.name +
                              "' contains only singular grid points",
                          profile.grid.omegas[i_low]);
  }
  BandValue out;
  out.value = sum / std::numbers::pi;
  out.coverage = static_cast<double>(valid) / static_cast<double>(total);
  return out;
}

double integrate_full(const RateProfile& profile) {
  BandSpec full{"full", 0.0, profile.grid.fs / 2.0};
  return integrate_band(profile, full).value;
}

std::vector<Multiplet> enumerate_multiplets(int n_blocks, int n) {
  if (n < 1 || n > n_blocks) {
    throw validation_error("multiplet order must lie in 1..M");
  }
  std::vector<Multiplet> out;
  Multiplet current(n);
  for (int i = 0; i < n; ++i) current[i] = i;
  for (;;) {
    out.push_back(current);
    int i = n - 1;
    while (i >= 0 && current[i] == n_blocks - n + i) --i;
    if (i < 0) break;
    ++current[i];
    for (int j = i + 1; j < n; ++j) current[j] = current[j - 1] + 1;
  }
  return out;
}

const RateEntry* RateTable::find(MeasureKind kind,
                                 const std::vector<int>& blocks) const {
  // Block order is irrelevant for lookup: MIR and OIR are permutation
  // invariant, so {1,0} addresses the same entry as {0,1}.
  std::vector<int> key = blocks;
  std::sort(key.begin(), key.end());
  for (const auto& e : entries) {
    std::vector<int> have = e.profile.blocks;
    std::sort(have.begin(), have.end());
    if (e.profile.kind == kind && have == key) return &e;
  }
  return nullptr;
}

RateTable all_rates(const SpectralMatrix& psd, const BlockStructure& blocks,
                    int max_order, const std::vector<BandSpec>& bands,
                    int jobs) {
  const int m = blocks.n_blocks();
  if (max_order < 1 || max_order > m) {
    throw validation_error("max_order must lie in 1..M");
  }
  for (const auto& band : bands) band.validate(psd.grid.fs);

  // Fixed work list: ER per block, MIR per pair, OIR per multiplet.
  struct Job {
    MeasureKind kind;
    Multiplet blocks;
  };
  std::vector<Job> jobs_list;
  for (int b = 0; b < m; ++b) jobs_list.push_back({MeasureKind::kEr, {b}});
  if (max_order >= 2) {
    for (const auto& pair : enumerate_multiplets(m, 2)) {
      jobs_list.push_back({MeasureKind::kMir, pair});
    }
  }
  for (int order = 3; order <= max_order; ++order) {
    for (const auto& mult : enumerate_multiplets(m, order)) {
      jobs_list.push_back({MeasureKind::kOir, mult});
    }
  }

  LogDetCache cache(psd, blocks);
  RateTable table;
  table.bands = bands;
  table.entries.resize(jobs_list.size());
  parallel_for(jobs_list.size(), jobs, [&](std::size_t i) {
    const Job& job = jobs_list[i];
    RateEntry entry;
    switch (job.kind) {
      case MeasureKind::kEr:
        entry.profile = spectral_er(cache, job.blocks[0]);
        break;
      case MeasureKind::kMir:
        entry.profile = spectral_mir(cache, job.blocks[0], job.blocks[1]);
        break;
      default:
        entry.profile = spectral_oir(cache, job.blocks);
        break;
    }
    BandSpec full{"full", 0.0, psd.grid.fs / 2.0};
    entry.full_band = integrate_band(entry.profile, full);
    entry.band_values.reserve(bands.size());
    for (const auto& band : bands) {
      entry.band_values.push_back(integrate_band(entry.profile, band));
    }
    table.entries[i] = std::move(entry);
  });
  return table;
}

}  // namespace infodyn
