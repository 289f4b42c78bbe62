#pragma once

#include <Eigen/Dense>
#include <vector>

#include "infodyn/grid.hpp"
#include "infodyn/var_model.hpp"

namespace infodyn {

// Hermitian Q x Q cross-power-spectral-density matrix sampled on a grid.
struct SpectralMatrix {
  FrequencyGrid grid;
  std::vector<Eigen::MatrixXcd> values;  // one q x q matrix per grid point

  int channels() const {
    return values.empty() ? 0 : static_cast<int>(values.front().rows());
  }

  // Maximum Hermitian asymmetry over all grid points.
  double max_asymmetry() const;
  // Most negative eigenvalue, normalized by the local trace.
  double min_relative_eigenvalue() const;
};

// Lag correlation matrices R(0..tau); R(-k) is recovered as R(k)^T.
struct CorrelationSequence {
  int tau = 0;
  std::vector<Eigen::MatrixXd> r;  // r[k] for k = 0..tau

  Eigen::MatrixXd at(int k) const {
    if (k >= 0) return r[k];
    return r[-k].transpose();
  }
};

// Symmetric non-negative lag window; weights stores w(0..tau) with w(0) = 1.
struct WindowSpec {
  enum class Kind { kParzen };
  Kind kind = Kind::kParzen;
  int tau = 0;
  std::vector<double> weights;
};

enum class OrderCriterion { kAic, kBic };

// Model-implied PSD P(omega) = H(omega) Sigma_U H(omega)^H on the grid.
SpectralMatrix var_psd(const VarModel& model, const FrequencyGrid& grid);

// Ordinary least squares identification of a VAR(p) model; the residual
// covariance uses divisor L - p (the number of regression rows).
VarModel ols_identify(const TimeSeriesData& data, int p);

// Order minimizing AIC or BIC over 1..p_max. All candidates are fitted on the
// same L' = L - p_max rows so the criterion values are comparable.
int select_order(const TimeSeriesData& data, int p_max, OrderCriterion criterion);

// Biased lag correlation estimate R(k) = (1/L) * sum_n Y_n Y_{n+k}^T.
CorrelationSequence biased_xcorr(const TimeSeriesData& data, int tau);

// Standard Parzen lag window of truncation lag tau; its Fourier transform is
// non-negative, which keeps the WC spectral estimate positive semi-definite.
WindowSpec parzen_window(int tau);

// Truncation lag from the window bandwidth relation B_w = 1.273 * fs / tau.
int bandwidth_to_tau(double bandwidth_hz, double fs);

// Blackman-Tukey / weighted-covariance PSD estimate
//   P(omega) = sum_{k=-tau}^{tau} w(k) R(k) e^{-j*omega*k},
// Hermitian by construction.
SpectralMatrix wc_psd(const TimeSeriesData& data, const WindowSpec& window,
                      const FrequencyGrid& grid);

// Estimator selection shared by the pipeline, the benchmark runner and the
// significance tests.
enum class EstimatorKind { kVar, kWc };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kVar;
  // VAR settings: a fixed order, or 0 to select via (criterion, p_max).
  int var_order = 0;
  OrderCriterion criterion = OrderCriterion::kBic;
  int p_max = 10;
  // WC settings: a truncation lag, or a bandwidth to derive it from.
  int wc_tau = 0;
  double wc_bandwidth_hz = 0.0;

  int resolve_tau(double fs) const;
  void validate() const;
};

SpectralMatrix estimate_psd(const TimeSeriesData& data, const EstimatorSpec& spec,
                            const FrequencyGrid& grid);

}  // namespace infodyn
