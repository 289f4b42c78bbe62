#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "infodyn/errors.hpp"

namespace infodyn {

// Uniform grid of normalized angular frequencies spanning [0, pi] inclusive.
// Physical frequencies map through omega = 2*pi*f/fs, so omega = pi is the
// Nyquist frequency fs/2.
struct FrequencyGrid {
  int n_freq = 0;
  double fs = 1.0;
  std::vector<double> omegas;

  static FrequencyGrid linear(int n, double fs) {
    if (n < 2) throw validation_error("frequency grid needs at least 2 points");
    if (!(fs > 0.0)) throw validation_error("sampling frequency must be positive");
    FrequencyGrid g;
    g.n_freq = n;
    g.fs = fs;
    g.omegas.resize(n);
    for (int i = 0; i < n; ++i) {
      g.omegas[i] =
          std::numbers::pi * (static_cast<double>(i) / static_cast<double>(n - 1));
    }
    return g;
  }

  double step() const { return omegas[1] - omegas[0]; }

  double freq_hz(int i) const {
    return omegas[i] * fs / (2.0 * std::numbers::pi);
  }

  // Nearest grid index for a frequency in Hz, clamped to the grid.
  int snap_index(double f_hz) const {
    const double pos = 2.0 * f_hz / fs * static_cast<double>(n_freq - 1);
    long idx = std::lround(pos);
    if (idx < 0) idx = 0;
    if (idx > n_freq - 1) idx = n_freq - 1;
    return static_cast<int>(idx);
  }

  bool operator==(const FrequencyGrid&) const = default;
};

}  // namespace infodyn
