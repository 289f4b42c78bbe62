#include "infodyn/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "infodyn/kernels.hpp"

namespace infodyn {

double SpectralMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (const auto& m : values) {
    worst = std::max(worst,
                     (m - m.adjoint().eval()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double SpectralMatrix::min_relative_eigenvalue() const {
  double worst = 0.0;
  for (const auto& m : values) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    const double tr = std::max(m.trace().real(), 1e-300);
    worst = std::min(worst, es.eigenvalues().minCoeff() / tr);
  }
  return worst;
}

SpectralMatrix var_psd(const VarModel& model, const FrequencyGrid& grid) {
  require_stationary(model);
  SpectralMatrix out;
  out.grid = grid;
  out.values.resize(grid.n_freq);
  const Eigen::MatrixXcd sigma = model.sigma_u.cast<std::complex<double>>();
  for (int f = 0; f < grid.n_freq; ++f) {
    const Eigen::MatrixXcd h = transfer_function(model, grid.omegas[f]);
    Eigen::MatrixXcd p = h * sigma * h.adjoint();
    // Symmetrize away the last few ulps so the Hermitian invariant is exact.
    out.values[f] = 0.5 * (p + p.adjoint().eval());
  }
  return out;
}

namespace {

// Shared regression assembly: response rows start..L-1, regressors are the p
// lagged sample vectors in lag-major order [Y_{n-1} .. Y_{n-p}].
void build_regression(const Eigen::MatrixXd& samples, long start, int p,
                      Eigen::MatrixXd& response, Eigen::MatrixXd& design) {
  const long L = samples.rows();
  const int q = static_cast<int>(samples.cols());
  const long rows = L - start;
  response = samples.bottomRows(rows);
  design.resize(rows, static_cast<long>(p) * q);
  for (int k = 1; k <= p; ++k) {
    design.middleCols(static_cast<long>(k - 1) * q, q) =
        samples.middleRows(start - k, rows);
  }
}

VarModel fit_from_regression(const Eigen::MatrixXd& response,
                             const Eigen::MatrixXd& design, int q, int p,
                             double fs) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw estimation_error(
        "rank-deficient regressor matrix; lower the order or provide more data");
  }
  const Eigen::MatrixXd beta = qr.solve(response);  // (p*q) x q
  const Eigen::MatrixXd resid = response - design * beta;
  VarModel model;
  model.q = q;
  model.p = p;
  model.fs = fs;
  model.coeffs.resize(p);
  for (int k = 0; k < p; ++k) {
    // beta rows (k*q + j) hold the weights of lag-(k+1) channel j for every
    // response channel: A_{k+1}(i, j) = beta(k*q + j, i).
    model.coeffs[k] = beta.middleRows(static_cast<long>(k) * q, q).transpose();
  }
  model.sigma_u =
      (resid.transpose() * resid) / static_cast<double>(response.rows());
  return model;
}

}  // namespace

VarModel ols_identify(const TimeSeriesData& data, int p) {
  data.validate();
  if (p < 1) throw validation_error("VAR order must be >= 1");
  const long L = data.length();
  const int q = data.channels();
  if (L <= static_cast<long>(p) * q + 1) {
    throw validation_error("too few samples for the requested VAR order");
  }
  Eigen::MatrixXd response, design;
  build_regression(data.samples, p, p, response, design);
  return fit_from_regression(response, design, q, p, data.fs);
}

int select_order(const TimeSeriesData& data, int p_max,
                 OrderCriterion criterion) {
  data.validate();
  if (p_max < 1) throw validation_error("p_max must be >= 1");
  const long L = data.length();
  const int q = data.channels();
  if (L <= static_cast<long>(p_max) * q + 1) {
    throw validation_error("too few samples for the requested p_max");
  }
  // One design matrix at the maximal order; candidate p uses its leading
  // p*q columns, so every fit sees the same L' = L - p_max rows.
  Eigen::MatrixXd response, design;
  build_regression(data.samples, p_max, p_max, response, design);
  const double rows = static_cast<double>(response.rows());

  int best_p = 1;
  double best_score = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    VarModel model;
    try {
      model = fit_from_regression(response, design.leftCols(static_cast<long>(p) * q),
                                  q, p, data.fs);
    } catch (const estimation_error& e) {
      throw estimation_error(std::string(e.what()) + " (candidate order " +
                             std::to_string(p) + ")");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(model.sigma_u);
    if (llt.info() != Eigen::Success) {
      throw estimation_error("singular residual covariance at candidate order " +
                             std::to_string(p));
    }
    double log_det = 0.0;
    for (int i = 0; i < q; ++i) {
      log_det += 2.0 * std::log(llt.matrixL()(i, i));
    }
    const double params = static_cast<double>(p) * q * q;
    const double penalty = criterion == OrderCriterion::kAic
                               ? 2.0 * params
                               : params * std::log(rows);
    const double score = rows * log_det + penalty;
    if (score < best_score) {
      best_score = score;
      best_p = p;
    }
  }
  return best_p;
}

CorrelationSequence biased_xcorr(const TimeSeriesData& data, int tau) {
  data.validate();
  const long L = data.length();
  if (tau < 0 || tau >= L) {
    throw validation_error("correlation lag must satisfy 0 <= tau <= L-1");
  }
  const int q = data.channels();
  CorrelationSequence seq;
  seq.tau = tau;
  seq.r.resize(tau + 1);
  // Columns are contiguous in memory, so each entry is a plain dot product of
  // channel i against channel j shifted by k.
  for (int k = 0; k <= tau; ++k) {
    Eigen::MatrixXd rk(q, q);
    for (int i = 0; i < q; ++i) {
      const double* ci = data.samples.col(i).data();
      for (int j = 0; j < q; ++j) {
        const double* cj = data.samples.col(j).data();
        rk(i, j) = kernels::dot(ci, cj + k, static_cast<std::size_t>(L - k)) /
                   static_cast<double>(L);
      }
    }
    seq.r[k] = std::move(rk);
  }
  return seq;
}

WindowSpec parzen_window(int tau) {
  if (tau < 1) throw validation_error("Parzen window needs tau >= 1");
  WindowSpec w;
  w.kind = WindowSpec::Kind::kParzen;
  w.tau = tau;
  w.weights.resize(tau + 1);
  for (int k = 0; k <= tau; ++k) {
    const double u = static_cast<double>(k) / tau;
    w.weights[k] = u <= 0.5 ? 1.0 - 6.0 * u * u + 6.0 * u * u * u
                            : 2.0 * (1.0 - u) * (1.0 - u) * (1.0 - u);
  }
  return w;
}

int bandwidth_to_tau(double bandwidth_hz, double fs) {
  if (!(bandwidth_hz > 0.0)) throw validation_error("bandwidth must be positive");
  if (!(fs > 0.0)) throw validation_error("sampling frequency must be positive");
  const long tau = std::lround(1.273 * fs / bandwidth_hz);
  return static_cast<int>(std::max(tau, 1L));
}

SpectralMatrix wc_psd(const TimeSeriesData& data, const WindowSpec& window,
                      const FrequencyGrid& grid) {
  data.validate();
  if (window.tau < 0 || static_cast<int>(window.weights.size()) < window.tau + 1) {
    throw validation_error("window weights do not cover the truncation lag");
  }
  if (window.tau > data.length() - 1) {
    throw validation_error("window truncation lag exceeds L-1");
  }
  const int q = data.channels();
  const int tau = window.tau;
  const int n_lag = tau + 1;
  const CorrelationSequence corr = biased_xcorr(data, tau);

  // For each ordered pair (i <= j) collect the lag profiles
  //   c[k] = w(k) * (R_k(i,j) + R_k(j,i)),  c[0] = R_0(i,j)
  //   s[k] = w(k) * (R_k(j,i) - R_k(i,j)),  s[0] = 0
  // so that P_ij(omega) = dot(c, cos(k*omega)) + j * dot(s, sin(k*omega)).
  // The sums run over the half lag axis because R(-k) = R(k)^T.
  const int n_pairs = q * (q + 1) / 2;
  std::vector<double> cos_lag(static_cast<std::size_t>(n_lag)),
      sin_lag(static_cast<std::size_t>(n_lag));
  std::vector<std::vector<double>> c(n_pairs), s(n_pairs);
  {
    int idx = 0;
    for (int i = 0; i < q; ++i) {
      for (int j = i; j < q; ++j, ++idx) {
        c[idx].resize(n_lag);
        s[idx].resize(n_lag);
        c[idx][0] = window.weights[0] * corr.r[0](i, j);
        s[idx][0] = 0.0;
        for (int k = 1; k <= tau; ++k) {
          const double w = window.weights[k];
          c[idx][k] = w * (corr.r[k](i, j) + corr.r[k](j, i));
          s[idx][k] = w * (corr.r[k](j, i) - corr.r[k](i, j));
        }
      }
    }
  }

  SpectralMatrix out;
  out.grid = grid;
  out.values.resize(grid.n_freq);
  for (int f = 0; f < grid.n_freq; ++f) {
    const double omega = grid.omegas[f];
    for (int k = 0; k < n_lag; ++k) {
      cos_lag[k] = std::cos(omega * k);
      sin_lag[k] = std::sin(omega * k);
    }
    Eigen::MatrixXcd p(q, q);
    int idx = 0;
    for (int i = 0; i < q; ++i) {
      for (int j = i; j < q; ++j, ++idx) {
        const double re =
            kernels::dot(c[idx].data(), cos_lag.data(), static_cast<std::size_t>(n_lag));
        const double im =
            kernels::dot(s[idx].data(), sin_lag.data(), static_cast<std::size_t>(n_lag));
        p(i, j) = std::complex<double>(re, im);
        if (i != j) p(j, i) = std::conj(p(i, j));
      }
    }
    out.values[f] = std::move(p);
  }
  return out;
}

int EstimatorSpec::resolve_tau(double fs) const {
  if (wc_tau > 0) return wc_tau;
  return bandwidth_to_tau(wc_bandwidth_hz, fs);
}

void EstimatorSpec::validate() const {
  if (kind == EstimatorKind::kVar) {
    if (var_order < 0) throw validation_error("var_order must be >= 0");
    if (var_order == 0 && p_max < 1) {
      throw validation_error("order selection needs p_max >= 1");
    }
  } else {
    const bool has_tau = wc_tau > 0;
    const bool has_bw = wc_bandwidth_hz > 0.0;
    if (has_tau == has_bw) {
      throw validation_error(
          "WC estimator needs exactly one of wc_tau or wc_bandwidth_hz");
    }
  }
}

SpectralMatrix estimate_psd(const TimeSeriesData& data, const EstimatorSpec& spec,
                            const FrequencyGrid& grid) {
  spec.validate();
  if (spec.kind == EstimatorKind::kVar) {
    const int order = spec.var_order > 0
                          ? spec.var_order
                          : select_order(data, spec.p_max, spec.criterion);
    return var_psd(ols_identify(data, order), grid);
  }
  return wc_psd(data, parzen_window(spec.resolve_tau(data.fs)), grid);
}

}  // namespace infodyn
