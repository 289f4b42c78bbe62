#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace infodyn {

// Error taxonomy mirrored by the CLI exit codes:
//   validation_error -> 1 (bad inputs, bad config, precondition violations)
//   estimation_error -> 2 (identification / resampling failures)
//   numerical_error  -> 2 (singular matrices, non-finite intermediates)
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class estimation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Carries the normalized angular frequency at which the failure occurred,
// NaN when the failure is not tied to a single grid point.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& msg,
                           double omega = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(msg), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

}  // namespace infodyn
