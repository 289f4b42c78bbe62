#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "infodyn/errors.hpp"

namespace infodyn {

// Q-variate linear autoregression Y_n = sum_k A_k Y_{n-k} + U_n with Gaussian
// innovations of covariance sigma_u.
struct VarModel {
  int q = 0;
  int p = 0;
  std::vector<Eigen::MatrixXd> coeffs;  // A_1 .. A_p, each q x q
  Eigen::MatrixXd sigma_u;              // q x q symmetric positive definite
  double fs = 1.0;

  // Checks dimensions, finiteness and positive definiteness of sigma_u.
  void validate() const;
};

// Partition of the q channels into M disjoint, non-empty blocks. Channel
// indices are 0-based internally.
struct BlockStructure {
  std::vector<std::vector<int>> assignment;

  int n_blocks() const { return static_cast<int>(assignment.size()); }
  int block_size(int b) const { return static_cast<int>(assignment[b].size()); }

  // Disjointness, non-emptiness and index-range checks against q channels.
  void validate(int q) const;

  // Sorted union of the channels of the given blocks.
  std::vector<int> channels_of(const std::vector<int>& block_ids) const;

  // One singleton block per channel.
  static BlockStructure singletons(int q);
};

// A finite realization: rows are time samples, columns are channels.
struct TimeSeriesData {
  Eigen::MatrixXd samples;  // L x q
  double fs = 1.0;
  std::vector<std::string> channel_names;  // optional, size q when present

  long length() const { return samples.rows(); }
  int channels() const { return samples.cols(); }
  void validate() const;
};

// Self-coefficients (a1, a2) of an AR(2) oscillator with complex-conjugate
// poles of modulus rho at normalized frequency f_norm:
//   a1 = 2*rho*cos(2*pi*f_norm), a2 = -rho^2.
std::pair<double, double> poles_to_coeffs(double rho, double f_norm);

// Largest eigenvalue modulus of the p*q x p*q companion matrix.
double companion_spectral_radius(const VarModel& model);

// Models at or beyond this radius are rejected as non-stationary; the margin
// below 1 guards the spectral integrals against near-singular spectra.
inline constexpr double kStationarityLimit = 1.0 - 1e-6;

// Throws validation_error when the model fails validate() or stationarity.
void require_stationary(const VarModel& model);

// Simulates n_samples rows after discarding n_transient burn-in rows, starting
// from zero initial conditions. Deterministic for a fixed seed.
TimeSeriesData simulate(const VarModel& model, long n_samples, long n_transient,
                        std::uint64_t seed);

// H(omega) = [I - sum_k A_k e^{-j*omega*k}]^{-1}.
Eigen::MatrixXcd transfer_function(const VarModel& model, double omega);

}  // namespace infodyn
