#include "infodyn/var_model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include "infodyn/rng.hpp"

namespace infodyn {

void VarModel::validate() const {
  if (q < 1) throw validation_error("VAR model needs at least one channel");
  if (p < 1) throw validation_error("VAR model order must be >= 1");
  if (!(fs > 0.0)) throw validation_error("sampling frequency must be positive");
  if (static_cast<int>(coeffs.size()) != p) {
    throw validation_error("coefficient list length does not match model order");
  }
  for (const auto& a : coeffs) {
    if (a.rows() != q || a.cols() != q) {
      throw validation_error("coefficient matrix dimensions do not match q");
    }
    if (!a.allFinite()) throw validation_error("non-finite VAR coefficient");
  }
  if (sigma_u.rows() != q || sigma_u.cols() != q) {
    throw validation_error("sigma_u dimensions do not match q");
  }
  if (!sigma_u.allFinite()) throw validation_error("non-finite sigma_u entry");
  if ((sigma_u - sigma_u.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, sigma_u.cwiseAbs().maxCoeff())) {
    throw validation_error("sigma_u is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_u,
                                                    Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw validation_error("sigma_u is not positive definite");
  }
}

void BlockStructure::validate(int q) const {
  if (assignment.empty()) throw validation_error("block structure is empty");
  std::set<int> seen;
  for (const auto& block : assignment) {
    if (block.empty()) throw validation_error("empty block in block structure");
    for (int ch : block) {
      if (ch < 0 || ch >= q) {
        throw validation_error("block channel index " + std::to_string(ch + 1) +
                               " outside 1.." + std::to_string(q));
      }
      if (!seen.insert(ch).second) {
        throw validation_error("channel " + std::to_string(ch + 1) +
                               " appears in more than one block");
      }
    }
  }
}

std::vector<int> BlockStructure::channels_of(
    const std::vector<int>& block_ids) const {
  std::vector<int> out;
  for (int b : block_ids) {
    if (b < 0 || b >= n_blocks()) {
      throw validation_error("block id " + std::to_string(b + 1) +
                             " outside 1.." + std::to_string(n_blocks()));
    }
    out.insert(out.end(), assignment[b].begin(), assignment[b].end());
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw validation_error("repeated channel across requested blocks");
  }
  return out;
}

BlockStructure BlockStructure::singletons(int q) {
  BlockStructure bs;
  bs.assignment.resize(q);
  for (int i = 0; i < q; ++i) bs.assignment[i] = {i};
  return bs;
}

void TimeSeriesData::validate() const {
  if (length() < 2) throw validation_error("time series needs at least 2 rows");
  if (channels() < 1) throw validation_error("time series needs at least 1 channel");
  if (!(fs > 0.0)) throw validation_error("sampling frequency must be positive");
  if (!samples.allFinite()) throw validation_error("non-finite sample value");
  if (!channel_names.empty() &&
      static_cast<int>(channel_names.size()) != channels()) {
    throw validation_error("channel name count does not match channel count");
  }
}

std::pair<double, double> poles_to_coeffs(double rho, double f_norm) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw validation_error("pole modulus must lie in [0, 1)");
  }
  if (!(f_norm >= 0.0 && f_norm <= 0.5)) {
    throw validation_error("normalized frequency must lie in [0, 0.5]");
  }
  const double a1 = 2.0 * rho * std::cos(2.0 * std::numbers::pi * f_norm);
  const double a2 = -rho * rho;
  return {a1, a2};
}

double companion_spectral_radius(const VarModel& model) {
  model.validate();
  const int q = model.q;
  const int p = model.p;
  const int n = p * q;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < p; ++k) {
    companion.block(0, k * q, q, q) = model.coeffs[k];
  }
  if (p > 1) {
    companion.block(q, 0, n - q, n - q) =
        Eigen::MatrixXd::Identity(n - q, n - q);
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void require_stationary(const VarModel& model) {
  const double radius = companion_spectral_radius(model);
  if (!(radius < kStationarityLimit)) {
    throw validation_error("non-stationary VAR model: companion spectral radius " +
                           std::to_string(radius));
  }
}

TimeSeriesData simulate(const VarModel& model, long n_samples, long n_transient,
                        std::uint64_t seed) {
  require_stationary(model);
  if (n_samples < model.p) {
    throw validation_error("requested fewer samples than the model order");
  }
  if (n_transient < 0) throw validation_error("negative transient length");

  const int q = model.q;
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma_u);
  if (llt.info() != Eigen::Success) {
    throw validation_error("sigma_u Cholesky factorization failed");
  }
  const Eigen::MatrixXd chol = llt.matrixL();

  Rng rng(stream_seed(seed, "simulate", 0));
  const long total = n_transient + n_samples;
  Eigen::MatrixXd buf(total, q);
  Eigen::VectorXd z(q), acc(q);
  for (long n = 0; n < total; ++n) {
    for (int c = 0; c < q; ++c) z(c) = rng.gaussian();
    acc.noalias() = chol * z;
    for (int k = 1; k <= model.p; ++k) {
      if (n - k < 0) break;  // zero initial conditions
      acc.noalias() += model.coeffs[k - 1] * buf.row(n - k).transpose();
    }
    buf.row(n) = acc.transpose();
  }

  TimeSeriesData out;
  out.samples = buf.bottomRows(n_samples);
  out.fs = model.fs;
  out.channel_names.reserve(q);
  for (int c = 0; c < q; ++c) out.channel_names.push_back("Y" + std::to_string(c + 1));
  return out;
}

Eigen::MatrixXcd transfer_function(const VarModel& model, double omega) {
  const int q = model.q;
  Eigen::MatrixXcd a_omega = Eigen::MatrixXcd::Zero(q, q);
  for (int k = 1; k <= model.p; ++k) {
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, -omega * k));
    a_omega += phase * model.coeffs[k - 1];
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(q, q) - a_omega;
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  if (!lu.isInvertible()) {
    throw numerical_error("singular [I - A(omega)] in transfer function", omega);
  }
  return lu.inverse();
}

}  // namespace infodyn
