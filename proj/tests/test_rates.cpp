#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>

#include "infodyn/errors.hpp"
#include "infodyn/rates.hpp"
#include "infodyn/scenarios.hpp"
#include "infodyn/spectral.hpp"

using namespace infodyn;

namespace {

constexpr double kHalfLn2PiE = 1.4189385332046727;  // 0.5 * ln(2*pi*e)

VarModel white_model(int q) {
  VarModel m;
  m.q = q;
  m.p = 1;
  m.fs = 1.0;
  m.coeffs = {Eigen::MatrixXd::Zero(q, q)};
  m.sigma_u = Eigen::MatrixXd::Identity(q, q);
  return m;
}

SpectralMatrix receiver_psd(int n_freq = 512) {
  const Scenario sc = build_star_receiver();
  return var_psd(sc.model, FrequencyGrid::linear(n_freq, sc.model.fs));
}

}  // namespace

TEST_CASE("hermitian_logdet matches the analytic determinant") {
  Eigen::MatrixXcd a(2, 2);
  a << std::complex<double>(4.0, 0.0), std::complex<double>(1.0, 2.0),
      std::complex<double>(1.0, -2.0), std::complex<double>(3.0, 0.0);
  // det = 4*3 - |1+2i|^2 = 12 - 5 = 7
  CHECK(hermitian_logdet(a) == doctest::Approx(std::log(7.0)).epsilon(1e-14));

  Eigen::MatrixXcd singular = Eigen::MatrixXcd::Ones(2, 2);
  CHECK(std::isnan(hermitian_logdet(singular)));
}

TEST_CASE("scalar white process has flat ER at half ln(2 pi e)") {
  const FrequencyGrid grid = FrequencyGrid::linear(128, 1.0);
  const SpectralMatrix psd = var_psd(white_model(1), grid);
  const RateProfile er = spectral_er(psd, BlockStructure::singletons(1), 0);
  for (double v : er.values) {
    CHECK(std::abs(v - kHalfLn2PiE) < 1e-10);
  }
  CHECK(integrate_full(er) == doctest::Approx(kHalfLn2PiE).epsilon(1e-12));
}

TEST_CASE("correlated white pair has flat MIR at -0.5 ln(1 - rho^2)") {
  VarModel m = white_model(2);
  m.sigma_u << 1.0, 0.5, 0.5, 1.0;
  const FrequencyGrid grid = FrequencyGrid::linear(128, 1.0);
  const SpectralMatrix psd = var_psd(m, grid);
  const RateProfile mir =
      spectral_mir(psd, BlockStructure::singletons(2), 0, 1);
  const double expected = -0.5 * std::log(0.75);  // 0.14384103622589045
  for (double v : mir.values) {
    CHECK(std::abs(v - expected) < 1e-6);
  }
  CHECK(integrate_full(mir) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("OIR of any 2-block multiplet is identically zero") {
  const SpectralMatrix psd = receiver_psd(64);
  const BlockStructure blocks = BlockStructure::singletons(5);
  const RateProfile oir = spectral_oir(psd, blocks, {1, 3});
  for (double v : oir.values) CHECK(v == 0.0);
  CHECK(integrate_full(oir) == 0.0);
}

TEST_CASE("MIR is symmetric bit-for-bit and non-negative") {
  const SpectralMatrix psd = receiver_psd(256);
  const BlockStructure blocks = BlockStructure::singletons(5);
  LogDetCache cache(psd, blocks);
  const RateProfile ab = spectral_mir(cache, 0, 1);
  const RateProfile ba = spectral_mir(cache, 1, 0);
  REQUIRE(ab.values.size() == ba.values.size());
  CHECK(std::memcmp(ab.values.data(), ba.values.data(),
                    ab.values.size() * sizeof(double)) == 0);
  for (double v : ab.values) CHECK(v >= -1e-8);
}

TEST_CASE("OIR is invariant under multiplet permutations") {
  const SpectralMatrix psd = receiver_psd(128);
  const BlockStructure blocks = BlockStructure::singletons(5);
  LogDetCache cache(psd, blocks);
  const RateProfile a = spectral_oir(cache, {0, 1, 2, 3});
  const RateProfile b = spectral_oir(cache, {3, 1, 0, 2});
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    CHECK(std::abs(a.values[i] - b.values[i]) < 1e-10);
  }
}

TEST_CASE("order-3 OIR equals the gradient of the third block") {
  const SpectralMatrix psd = receiver_psd(128);
  const BlockStructure blocks = BlockStructure::singletons(5);
  LogDetCache cache(psd, blocks);
  const RateProfile oir = spectral_oir(cache, {0, 1, 2});
  const RateProfile grad = spectral_oir_gradient(cache, 2, {0, 1});
  for (std::size_t i = 0; i < oir.values.size(); ++i) {
    CHECK(std::abs(oir.values[i] - grad.values[i]) < 1e-12);
  }
}

TEST_CASE("gradient requires a context of at least two blocks") {
  const SpectralMatrix psd = receiver_psd(16);
  const BlockStructure blocks = BlockStructure::singletons(5);
  LogDetCache cache(psd, blocks);
  CHECK_THROWS_AS(spectral_oir_gradient(cache, 2, {0}), validation_error);
  CHECK_THROWS_AS(spectral_oir_gradient(cache, 0, {0, 1}), validation_error);
}

TEST_CASE("log-determinant cache agrees with direct evaluation") {
  const SpectralMatrix psd = receiver_psd(64);
  const BlockStructure blocks = BlockStructure::singletons(5);
  LogDetCache cache(psd, blocks);
  const Multiplet m = {0, 2, 4};
  const std::vector<double>& cached = cache.logdets(m);
  const std::vector<int> channels = blocks.channels_of(m);
  for (int i = 0; i < psd.grid.n_freq; ++i) {
    Eigen::MatrixXcd sub(channels.size(), channels.size());
    for (std::size_t r = 0; r < channels.size(); ++r) {
      for (std::size_t c = 0; c < channels.size(); ++c) {
        sub(r, c) = psd.values[i](channels[r], channels[c]);
      }
    }
    CHECK(std::abs(cached[i] - hermitian_logdet(sub)) < 1e-12);
  }
  // Second lookup returns the same values.
  const std::vector<double>& again = cache.logdets({4, 0, 2});
  CHECK(std::memcmp(cached.data(), again.data(),
                    cached.size() * sizeof(double)) == 0);
}

TEST_CASE("Kolmogorov-Szego identity on the benchmark models") {
  // Full-process joint ER integral vs 0.5 * ln((2 pi e)^Q |Sigma_U|); both
  // benchmark models have identity innovation covariance.
  struct Case {
    Scenario sc;
    double expected;
  };
  const Case cases[] = {
      {build_star_receiver(), 5.0 * kHalfLn2PiE},   // 7.0946926660
      {build_block_network(), 6.0 * kHalfLn2PiE},   // 8.5136311992
  };
  for (const Case& c : cases) {
    const FrequencyGrid grid = FrequencyGrid::linear(4096, c.sc.model.fs);
    const SpectralMatrix psd = var_psd(c.sc.model, grid);
    // Join all blocks into one and take its ER.
    BlockStructure joint;
    joint.assignment = {{}};
    for (int ch = 0; ch < c.sc.model.q; ++ch) joint.assignment[0].push_back(ch);
    const RateProfile er = spectral_er(psd, joint, 0);
    const double integral = integrate_full(er);
    CHECK(std::abs(integral - c.expected) / c.expected < 0.01);
    CHECK(integral == doctest::Approx(c.expected).epsilon(1e-4));
  }
}

TEST_CASE("band integration of a constant profile is exact") {
  RateProfile profile;
  profile.grid = FrequencyGrid::linear(101, 1.0);
  profile.values.assign(101, 2.0);

  CHECK(integrate_full(profile) == doctest::Approx(2.0).epsilon(1e-12));
  // Sub-band integral of a constant v over [f1, f2] is 2 * v * (f2-f1) / fs.
  const BandValue band = integrate_band(profile, {"mid", 0.1, 0.2});
  CHECK(band.value == doctest::Approx(2.0 * 2.0 * 0.1 / 1.0).epsilon(1e-9));
  CHECK(band.coverage == 1.0);
}

TEST_CASE("singular grid points are excluded and reported") {
  RateProfile profile;
  profile.grid = FrequencyGrid::linear(11, 1.0);
  profile.values.assign(11, 1.0);
  profile.values[5] = std::numeric_limits<double>::quiet_NaN();
  profile.singular_points = 1;

  const BandValue full = integrate_band(profile, {"full", 0.0, 0.5});
  CHECK(full.coverage == doctest::Approx(10.0 / 11.0));
  // The NaN point is skipped; remaining trapezoids still integrate close to 1.
  CHECK(full.value == doctest::Approx(1.0).epsilon(0.15));

  RateProfile all_bad = profile;
  all_bad.values.assign(11, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(integrate_band(all_bad, {"full", 0.0, 0.5}),
                  numerical_error);
}

TEST_CASE("band specs validate against the Nyquist range") {
  const BandSpec ok{"ok", 0.04, 0.15};
  const BandSpec inverted{"bad", 0.3, 0.2};
  const BandSpec negative{"bad", -0.1, 0.2};
  const BandSpec beyond{"bad", 0.1, 0.6};
  const BandSpec unnamed{"", 0.1, 0.2};
  CHECK_NOTHROW(ok.validate(1.0));
  CHECK_THROWS_AS(inverted.validate(1.0), validation_error);
  CHECK_THROWS_AS(negative.validate(1.0), validation_error);
  CHECK_THROWS_AS(beyond.validate(1.0), validation_error);
  CHECK_THROWS_AS(unnamed.validate(1.0), validation_error);
}

TEST_CASE("multiplet enumeration is lexicographic and complete") {
  const std::vector<Multiplet> m3 = enumerate_multiplets(5, 3);
  REQUIRE(m3.size() == 10);
  CHECK(m3.front() == Multiplet{0, 1, 2});
  CHECK(m3.back() == Multiplet{2, 3, 4});
  CHECK(enumerate_multiplets(5, 5).size() == 1);
  CHECK(enumerate_multiplets(4, 2).size() == 6);
}

TEST_CASE("all_rates produces the full measure inventory") {
  const Scenario sc = build_star_receiver();
  const FrequencyGrid grid = FrequencyGrid::linear(128, 1.0);
  const SpectralMatrix psd = var_psd(sc.model, grid);
  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}, {"HF", 0.15, 0.4}};
  const RateTable table = all_rates(psd, sc.blocks, 5, bands);

  int er = 0;
  int mir = 0;
  int oir = 0;
  for (const RateEntry& entry : table.entries) {
    switch (entry.profile.kind) {
      case MeasureKind::kEr: ++er; break;
      case MeasureKind::kMir: ++mir; break;
      case MeasureKind::kOir: ++oir; break;
      default: break;
    }
    CHECK(entry.band_values.size() == 2);
    CHECK(entry.profile.singular_points == 0);
  }
  CHECK(er == 5);
  CHECK(mir == 10);
  CHECK(oir == 16);

  const RateEntry* found = table.find(MeasureKind::kMir, {1, 0});
  REQUIRE(found != nullptr);
  CHECK(found->profile.kind == MeasureKind::kMir);

  CHECK(table.find(MeasureKind::kOir, {0, 1}) == nullptr);
}

TEST_CASE("all_rates is byte-identical across job counts") {
  const Scenario sc = build_star_receiver();
  const FrequencyGrid grid = FrequencyGrid::linear(64, 1.0);
  const SpectralMatrix psd = var_psd(sc.model, grid);
  const std::vector<BandSpec> bands = {{"LF", 0.04, 0.15}};
  const RateTable t1 = all_rates(psd, sc.blocks, 5, bands, 1);
  const RateTable t4 = all_rates(psd, sc.blocks, 5, bands, 4);
  REQUIRE(t1.entries.size() == t4.entries.size());
  for (std::size_t e = 0; e < t1.entries.size(); ++e) {
    const auto& a = t1.entries[e].profile.values;
    const auto& b = t4.entries[e].profile.values;
    REQUIRE(a.size() == b.size());
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
}
