#pragma once

#include <complex>
#include <cstddef>

namespace infodyn {

// Minimal real-to-complex FFT wrapper around FFTW for a fixed length n.
// Plans are created with FFTW_ESTIMATE (deterministic plan choice) under a
// global mutex because FFTW's planner is not thread-safe; execution on the
// instance's own buffers needs no locking. Instances are not copyable and not
// safe to share across threads; create one per worker.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  int n_bins() const { return n_ / 2 + 1; }

  // out must hold n_bins() complex values.
  void forward(const double* in, std::complex<double>* out);
  // Inverse transform scaled by 1/n; out must hold size() reals.
  void inverse(const std::complex<double>* in, double* out);

 private:
  int n_;
  void* plan_fwd_;
  void* plan_inv_;
  double* real_buf_;
  void* complex_buf_;
};

}  // namespace infodyn
